#include <gtest/gtest.h>

#include <random>

#include "dlfusion/error.hpp"
#include "dlfusion/fusion_opt.hpp"
#include "dlfusion/mp_select.hpp"
#include "dlfusion/perf_model.hpp"
#include "oracles.hpp"

using namespace dlfusion;

namespace {

NetworkIR fixture(const std::string& name) {
  return load_network(std::string(DLFUSION_FIXTURE_DIR) + "/" + name + ".json");
}

std::vector<oracle::SimBlock> as_sim(const Schedule& s) {
  std::vector<oracle::SimBlock> out;
  for (const auto& b : s.blocks) out.push_back({b.layer_ids, b.mp});
  return out;
}

}  // namespace

TEST(RoundBlockMp, NearestAndFloor) {
  CostModelConfig cfg;
  EXPECT_EQ(round_block_mp(1.0, cfg), 1);
  EXPECT_EQ(round_block_mp(5.0, cfg), 4);
  EXPECT_EQ(round_block_mp(6.0, cfg), 8);
  EXPECT_EQ(round_block_mp(40.0, cfg), 32);
  cfg.round_mode = RoundMode::Floor;
  EXPECT_EQ(round_block_mp(7.9, cfg), 4);
  EXPECT_EQ(round_block_mp(0.5, cfg), 1);
}

TEST(JointOpt, MatchesLoopSimulation) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> threshold(0.05, 40.0);
  for (int trial = 0; trial < 200; ++trial) {
    const auto net = oracle::random_network(rng, 30);
    CostModelConfig cfg;
    if (trial % 3 == 0) cfg.round_mode = RoundMode::Floor;
    const double t = trial % 2 ? threshold(rng) : cfg.threshold_gops();
    EXPECT_EQ(as_sim(joint_opt(net, cfg, t)), oracle::simulate_joint_opt(net, cfg, t))
        << "trial " << trial;
  }
}

TEST(JointOpt, BlocksReachThresholdExceptLast) {
  const CostModelConfig cfg;
  for (const char* name : {"resnet18", "vgg19", "alexnet", "mobilenet", "resnet50"}) {
    const auto net = fixture(name);
    for (double t : {0.5, 1.0, 4.0, cfg.threshold_gops()}) {
      const auto s = joint_opt(net, cfg, t);
      EXPECT_NO_THROW(check_coverage(net, s));
      for (std::size_t i = 0; i + 1 < s.blocks.size(); ++i) {
        EXPECT_GE(s.blocks[i].sum_op.gops() / s.blocks[i].avg_mp, t) << name;
        EXPECT_EQ(s.blocks[i].mp, round_block_mp(s.blocks[i].avg_mp, cfg));
      }
    }
  }
}

TEST(JointOpt, LargerThresholdMeansFewerBlocks) {
  const CostModelConfig cfg;
  const auto net = fixture("resnet50");
  std::size_t last = SIZE_MAX;
  for (double t = 0.25; t < 64.0; t *= 2) {
    const auto n = joint_opt(net, cfg, t).blocks.size();
    EXPECT_LE(n, last);
    last = n;
  }
}

TEST(JointOpt, AttachedLayers) {
  const CostModelConfig cfg;
  NetworkIR net{"n", {}};
  net.layers.push_back(attached_layer(0, LayerKind::BatchNorm));
  net.layers.push_back(conv_layer(1, make_conv(64, 64, 56, 3)));
  net.layers.push_back(attached_layer(2, LayerKind::ReLU));
  net.layers.push_back(attached_layer(3, LayerKind::Pool));
  const auto s = joint_opt(net, cfg, 1e-6);
  ASSERT_EQ(s.blocks.size(), 1u);
  EXPECT_EQ(s.blocks[0].layer_ids, (std::vector<std::int64_t>{0, 1, 2, 3}));
  EXPECT_EQ(s.blocks[0].mp, optimal_mp(net.layers[1], cfg).mp);
}

TEST(JointOpt, Errors) {
  const CostModelConfig cfg;
  NetworkIR empty{"e", {attached_layer(0, LayerKind::ReLU)}};
  EXPECT_THROW(joint_opt(empty, cfg), NoComputeLayerError);
  const auto net = fixture("alexnet");
  EXPECT_THROW(joint_opt(net, cfg, 0.0), DomainError);
  EXPECT_THROW(joint_opt(net, cfg, -1.0), DomainError);
}

TEST(Strategies, Shapes) {
  const CostModelConfig cfg;
  const auto net = fixture("alexnet");
  const auto n = net.layers.size();

  const auto s1 = strategy_schedule(net, cfg, 1);
  EXPECT_EQ(s1.blocks.size(), n);
  for (const auto& b : s1.blocks) EXPECT_EQ(b.mp, 1);
  EXPECT_EQ(s1.strategy, "no-fusion-mp1");

  const auto s2 = strategy_schedule(net, cfg, 2, 8);
  EXPECT_EQ(s2.blocks.size(), n);
  for (const auto& b : s2.blocks) EXPECT_EQ(b.mp, 8);

  const auto s3 = strategy_schedule(net, cfg, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& l = net.layers[i];
    EXPECT_EQ(s3.blocks[i].mp, l.is_compute() ? optimal_mp(l, cfg).mp : 1);
  }

  const auto s4 = strategy_schedule(net, cfg, 4);
  ASSERT_EQ(s4.blocks.size(), 1u);
  EXPECT_EQ(s4.blocks[0].mp, 32);
  EXPECT_EQ(s4.blocks[0].layer_ids.size(), n);

  const auto s6 = strategy_schedule(net, cfg, 6);
  const auto s5 = strategy_schedule(net, cfg, 5, 4);
  ASSERT_EQ(s5.blocks.size(), s6.blocks.size());
  for (std::size_t i = 0; i < s5.blocks.size(); ++i) {
    EXPECT_EQ(s5.blocks[i].layer_ids, s6.blocks[i].layer_ids);
    EXPECT_EQ(s5.blocks[i].mp, 4);
  }
  EXPECT_EQ(s6.strategy, "dlfusion");
}

TEST(Strategies, Errors) {
  const CostModelConfig cfg;
  const auto net = fixture("alexnet");
  EXPECT_THROW(strategy_schedule(net, cfg, 0), InvalidStrategyError);
  EXPECT_THROW(strategy_schedule(net, cfg, 7), InvalidStrategyError);
  EXPECT_THROW(strategy_schedule(net, cfg, 2), InvalidStrategyError);
  EXPECT_THROW(strategy_schedule(net, cfg, 2, 3), InvalidMpError);
  EXPECT_THROW(strategy_schedule(net, cfg, 5, 64), InvalidMpError);
}

TEST(Strategies, DlFusionBeatsNoFusionOnFixtures) {
  const CostModelConfig cfg;
  for (const char* name : {"resnet18", "vgg19", "alexnet", "mobilenet", "resnet50"}) {
    const auto net = fixture(name);
    const double s1 = predict_schedule(net, strategy_schedule(net, cfg, 1), cfg).total_ms;
    const double s6 = predict_schedule(net, strategy_schedule(net, cfg, 6), cfg).total_ms;
    EXPECT_LE(s6, s1) << name;
  }
}
