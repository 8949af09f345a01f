#include "dlfusion/oracle_search.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <numeric>
#include <thread>

#include "dlfusion/error.hpp"
#include "dlfusion/perf_model.hpp"

namespace dlfusion {

void validate_search_spec(const SearchSpaceSpec& spec, const CostModelConfig& cfg) {
  if (spec.mp_choices.empty()) throw ValidationError("mp_choices must not be empty");
  for (int mp : spec.mp_choices) {
    if (mp < 1 || mp > cfg.num_cores) {
      throw ValidationError("mp choice " + std::to_string(mp) + " outside [1, " +
                            std::to_string(cfg.num_cores) + "]");
    }
  }
  auto sorted = spec.mp_choices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ValidationError("mp_choices must not repeat values");
  }
  if (spec.block_size_multiple < 1) throw ValidationError("block_size_multiple must be ≥ 1");
}

PartitionEnumerator::PartitionEnumerator(std::int64_t n, int block_size_multiple)
    : n_(n), multiple_(block_size_multiple) {
  if (n < 1) throw DomainError("cannot partition an empty network");
  if (block_size_multiple < 1) throw DomainError("block_size_multiple must be ≥ 1");
}

bool PartitionEnumerator::advance() {
  const auto sum = std::accumulate(prefix_.begin(), prefix_.end(), std::int64_t{0});
  if (sum + multiple_ < n_) {
    prefix_.push_back(multiple_);
    return true;
  }
  while (!prefix_.empty()) {
    prefix_.back() += multiple_;
    const auto s = std::accumulate(prefix_.begin(), prefix_.end(), std::int64_t{0});
    if (s < n_) return true;
    prefix_.pop_back();
  }
  return false;
}

bool PartitionEnumerator::next(Partition& out) {
  if (done_) return false;
  if (started_ && !advance()) {
    done_ = true;
    return false;
  }
  started_ = true;
  out.clear();
  std::int64_t begin = 0;
  for (auto size : prefix_) {
    out.emplace_back(begin, begin + size);
    begin += size;
  }
  out.emplace_back(begin, n_);
  return true;
}

std::vector<Partition> enumerate_partitions(std::int64_t n, int block_size_multiple) {
  std::vector<Partition> all;
  PartitionEnumerator it(n, block_size_multiple);
  Partition p;
  while (it.next(p)) all.push_back(p);
  return all;
}

SpaceSize candidate_count(std::int64_t n, const SearchSpaceSpec& spec) {
  if (n < 1) return 0;
  const SpaceSize k = spec.mp_choices.size();
  const std::int64_t m = spec.block_size_multiple;
  // prefixes[s]: weighted number of non-final block sequences summing to s.
  std::map<std::int64_t, SpaceSize> prefixes{{0, 1}};
  SpaceSize total = 0;
  for (std::int64_t s = 0; s < n; s += m) {
    SpaceSize ways = s == 0 ? SpaceSize(1) : SpaceSize(0);
    for (std::int64_t t = m; t <= s; t += m) ways += prefixes[s - t] * k;
    prefixes[s] = ways;
    total += ways * k;
  }
  return total;
}

namespace {

// Latency of every block range that can occur, for each mp choice.
class BlockTable {
 public:
  BlockTable(const NetworkIR& net, const CostModelConfig& cfg, const SearchSpaceSpec& spec,
             unsigned threads)
      : k_(spec.mp_choices.size()) {
    const auto n = static_cast<std::int64_t>(net.layers.size());
    const std::int64_t m = spec.block_size_multiple;
    for (std::int64_t a = 0; a < n; a += m) {
      for (std::int64_t b = a + m; b < n; b += m) ranges_.emplace_back(a, b);
      ranges_.emplace_back(a, n);
    }
    std::sort(ranges_.begin(), ranges_.end());
    ranges_.erase(std::unique(ranges_.begin(), ranges_.end()), ranges_.end());
    latency_.assign(ranges_.size() * k_, 0.0);

    // Each worker fills a disjoint strided slice, so the table does not
    // depend on scheduling.
    auto work = [&](unsigned worker, unsigned workers) {
      for (std::size_t r = worker; r < ranges_.size(); r += workers) {
        auto [a, b] = ranges_[r];
        auto span = layer_range(net, a, b - 1);
        for (std::size_t j = 0; j < k_; ++j) {
          latency_[r * k_ + j] = block_cost(span, spec.mp_choices[j], b - a > 1, cfg).latency_ms;
        }
      }
    };
    if (threads <= 1 || ranges_.size() < 2) {
      work(0, 1);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }
  }

  const double* row(const BlockRange& range) const {
    auto it = std::lower_bound(ranges_.begin(), ranges_.end(), range);
    return &latency_[static_cast<std::size_t>(it - ranges_.begin()) * k_];
  }

 private:
  std::size_t k_;
  std::vector<BlockRange> ranges_;
  std::vector<double> latency_;
};

}  // namespace

SearchResult brute_force(const NetworkIR& net, const CostModelConfig& cfg,
                         const SearchSpaceSpec& spec, unsigned threads) {
  const auto start = std::chrono::steady_clock::now();
  validate_search_spec(spec, cfg);
  const auto n = static_cast<std::int64_t>(net.layers.size());
  const SpaceSize count = candidate_count(n, spec);
  if (count > spec.max_candidates) {
    throw SpaceTooLargeError("search space has " + count.str() + " candidates, above the cap of " +
                             std::to_string(spec.max_candidates));
  }
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());

  const BlockTable table(net, cfg, spec, threads);
  const std::size_t k = spec.mp_choices.size();

  double best_latency = 0.0;
  Partition best_partition;
  std::vector<int> best_mps;
  std::uint64_t evaluated = 0;

  auto better = [&](double latency, const Partition& p, const std::vector<int>& mps) {
    if (best_partition.empty()) return true;
    if (definitely_less(latency, best_latency)) return true;
    if (definitely_less(best_latency, latency)) return false;
    if (p.size() != best_partition.size()) return p.size() < best_partition.size();
    return mps < best_mps;
  };

  PartitionEnumerator partitions(n, spec.block_size_multiple);
  Partition p;
  std::vector<const double*> rows;
  std::vector<std::size_t> digit;
  std::vector<int> mps;
  while (partitions.next(p)) {
    rows.clear();
    for (const auto& range : p) rows.push_back(table.row(range));
    digit.assign(p.size(), 0);
    mps.assign(p.size(), spec.mp_choices[0]);
    while (true) {
      double latency = 0.0;
      for (std::size_t b = 0; b < p.size(); ++b) latency += rows[b][digit[b]];
      ++evaluated;
      for (std::size_t b = 0; b < p.size(); ++b) mps[b] = spec.mp_choices[digit[b]];
      if (better(latency, p, mps)) {
        best_latency = latency;
        best_partition = p;
        best_mps = mps;
      }
      // Odometer over per-block mp indices, last block fastest.
      std::size_t b = p.size();
      while (b > 0 && ++digit[b - 1] == k) digit[--b] = 0;
      if (b == 0) break;
    }
  }

  SearchResult result;
  result.best.network_name = net.name;
  result.best.strategy = "oracle";
  for (std::size_t b = 0; b < best_partition.size(); ++b) {
    auto [first, end] = best_partition[b];
    result.best.blocks.push_back(make_block(net, first, end - 1, best_mps[b], best_mps[b]));
  }
  result.best_latency_ms = predict_schedule(net, result.best, cfg).total_ms;
  result.candidates_evaluated = evaluated;
  result.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace dlfusion
