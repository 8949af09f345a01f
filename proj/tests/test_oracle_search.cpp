#include <gtest/gtest.h>

#include <random>

#include "dlfusion/error.hpp"
#include "dlfusion/fusion_opt.hpp"
#include "dlfusion/oracle_search.hpp"
#include "dlfusion/perf_model.hpp"
#include "oracles.hpp"

using namespace dlfusion;

namespace {

NetworkIR fixture(const std::string& name) {
  return load_network(std::string(DLFUSION_FIXTURE_DIR) + "/" + name + ".json");
}

// Random conv/fc/attached nets small enough for the recursive oracle.
NetworkIR small_net(std::mt19937_64& rng, std::int64_t n) {
  NetworkIR net;
  do {
    net = oracle::random_network(rng, static_cast<int>(n));
  } while (static_cast<std::int64_t>(net.layers.size()) < 2);
  return net;
}

}  // namespace

TEST(Partitions, OrderForEightLayers) {
  const auto all = enumerate_partitions(8, 4);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0], (Partition{{0, 8}}));
  EXPECT_EQ(all[1], (Partition{{0, 4}, {4, 8}}));
}

TEST(Partitions, OrderForFiveLayers) {
  const auto all = enumerate_partitions(5, 4);
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[0], (Partition{{0, 5}}));
  EXPECT_EQ(all[1], (Partition{{0, 4}, {4, 5}}));
}

TEST(Partitions, ShapeAndCount) {
  for (std::int64_t n = 1; n <= 14; ++n) {
    for (int m : {1, 2, 3, 4}) {
      const auto all = enumerate_partitions(n, m);
      // Compositions of each multiple of m below n into parts of m.
      std::vector<std::uint64_t> ways(static_cast<std::size_t>(n) + 1, 0);
      ways[0] = 1;
      std::uint64_t expected = 0;
      for (std::int64_t s = 0; s < n; s += m) {
        for (std::int64_t t = m; t <= s; t += m) ways[s] += ways[s - t];
        expected += ways[s];
      }
      EXPECT_EQ(all.size(), expected) << n << " " << m;
      for (const auto& p : all) {
        std::int64_t next = 0;
        for (std::size_t b = 0; b < p.size(); ++b) {
          EXPECT_EQ(p[b].first, next);
          EXPECT_GT(p[b].second, p[b].first);
          if (b + 1 < p.size()) EXPECT_EQ((p[b].second - p[b].first) % m, 0);
          next = p[b].second;
        }
        EXPECT_EQ(next, n);
      }
      for (std::size_t i = 1; i < all.size(); ++i) EXPECT_NE(all[i], all[i - 1]);
    }
  }
}

TEST(CandidateCount, KnownValues) {
  const SearchSpaceSpec spec;
  EXPECT_EQ(candidate_count(1, spec), 8);
  EXPECT_EQ(candidate_count(4, spec), 8);
  EXPECT_EQ(candidate_count(8, spec), 72);
  EXPECT_EQ(candidate_count(18, spec), 52'488);
  EXPECT_EQ(candidate_count(20, spec), 52'488);
  EXPECT_EQ(candidate_count(28, spec), 4'251'528);
}

TEST(CandidateCount, MatchesEnumeration) {
  SearchSpaceSpec spec;
  spec.mp_choices = {1, 2, 4};
  for (std::int64_t n = 1; n <= 12; ++n) {
    for (int m : {1, 2, 4}) {
      spec.block_size_multiple = m;
      SpaceSize total = 0;
      for (const auto& p : enumerate_partitions(n, m)) {
        total += boost::multiprecision::pow(SpaceSize(3), static_cast<unsigned>(p.size()));
      }
      EXPECT_EQ(candidate_count(n, spec), total);
    }
  }
}

TEST(BruteForce, MatchesRecursiveSearch) {
  std::mt19937_64 rng(77);
  const CostModelConfig cfg;
  for (int trial = 0; trial < 25; ++trial) {
    const auto net = small_net(rng, 9);
    SearchSpaceSpec spec;
    spec.mp_choices = {1, 2, 4, 8, 32};
    spec.block_size_multiple = 1 + trial % 3;
    const auto got = brute_force(net, cfg, spec, 1 + trial % 4);
    const auto want = oracle::exhaustive_search(net, cfg, spec.mp_choices, spec.block_size_multiple);
    EXPECT_EQ(got.candidates_evaluated, want.candidates) << trial;
    EXPECT_EQ(got.best_latency_ms, want.latency_ms) << trial;
    ASSERT_EQ(got.best.blocks.size(), want.best.blocks.size()) << trial;
    for (std::size_t b = 0; b < got.best.blocks.size(); ++b) {
      EXPECT_EQ(got.best.blocks[b].layer_ids, want.best.blocks[b].layer_ids) << trial;
      EXPECT_EQ(got.best.blocks[b].mp, want.best.blocks[b].mp) << trial;
    }
  }
}

TEST(BruteForce, LatencyMatchesPredictAndBoundsStrategies) {
  const CostModelConfig cfg;
  for (const char* name : {"alexnet", "resnet18", "vgg19"}) {
    const auto net = fixture(name);
    const auto r = brute_force(net, cfg, SearchSpaceSpec{});
    EXPECT_EQ(r.best_latency_ms, predict_schedule(net, r.best, cfg).total_ms);
    EXPECT_EQ(r.candidates_evaluated, candidate_count(static_cast<std::int64_t>(net.layers.size()),
                                                      SearchSpaceSpec{}));
    // Strategy 4 (one block at 32 cores) lies inside the searched space.
    const double s4 = predict_schedule(net, strategy_schedule(net, cfg, 4), cfg).total_ms;
    EXPECT_LE(r.best_latency_ms, s4);
  }
}

TEST(BruteForce, UnitMultipleBoundsPerLayerStrategies) {
  const CostModelConfig cfg;
  NetworkIR net{"small", {}};
  net.layers.push_back(conv_layer(0, make_conv(3, 64, 56, 3)));
  net.layers.push_back(attached_layer(1, LayerKind::ReLU));
  net.layers.push_back(conv_layer(2, make_conv(64, 64, 56, 3)));
  net.layers.push_back(conv_layer(3, make_conv(64, 128, 28, 3, 2)));
  net.layers.push_back(fc_layer(4, {1, 2048, 10}));
  SearchSpaceSpec spec;
  spec.mp_choices = power_of_two_mps(cfg);
  spec.block_size_multiple = 1;
  const auto r = brute_force(net, cfg, spec);
  for (int s : {1, 3, 4, 6}) {
    EXPECT_LE(r.best_latency_ms, predict_schedule(net, strategy_schedule(net, cfg, s), cfg).total_ms);
  }
  for (int mp : spec.mp_choices) {
    for (int s : {2, 5}) {
      EXPECT_LE(r.best_latency_ms,
                predict_schedule(net, strategy_schedule(net, cfg, s, mp), cfg).total_ms);
    }
  }
}

TEST(BruteForce, DeterministicAcrossThreadCounts) {
  const CostModelConfig cfg;
  const auto net = fixture("resnet18");
  const auto a = brute_force(net, cfg, SearchSpaceSpec{}, 1);
  for (unsigned threads : {2u, 3u, 8u}) {
    const auto b = brute_force(net, cfg, SearchSpaceSpec{}, threads);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.best_latency_ms, b.best_latency_ms);
  }
}

TEST(BruteForce, Errors) {
  const CostModelConfig cfg;
  EXPECT_THROW(brute_force(fixture("resnet50"), cfg, SearchSpaceSpec{}), SpaceTooLargeError);
  SearchSpaceSpec spec;
  spec.mp_choices = {};
  EXPECT_THROW(validate_search_spec(spec, cfg), ValidationError);
  spec.mp_choices = {0, 4};
  EXPECT_THROW(validate_search_spec(spec, cfg), ValidationError);
  spec.mp_choices = {64};
  EXPECT_THROW(validate_search_spec(spec, cfg), ValidationError);
  spec.mp_choices = {4};
  spec.block_size_multiple = 0;
  EXPECT_THROW(validate_search_spec(spec, cfg), ValidationError);
  EXPECT_THROW(enumerate_partitions(0, 4), DomainError);
}
