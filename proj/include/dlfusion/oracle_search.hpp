#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/model_ir.hpp"
#include "dlfusion/opcount.hpp"
#include "dlfusion/schedule.hpp"

namespace dlfusion {

/// Restricted search space for the brute-force baseline.
struct SearchSpaceSpec {
  std::vector<int> mp_choices{1, 2, 4, 8, 12, 16, 24, 32};
  int block_size_multiple = 4;
  std::uint64_t max_candidates = 10'000'000;
};

/// Throws ValidationError unless the spec is usable with `cfg`.
void validate_search_spec(const SearchSpaceSpec& spec, const CostModelConfig& cfg);

/// Half-open layer range [begin, end).
using BlockRange = std::pair<std::int64_t, std::int64_t>;
using Partition = std::vector<BlockRange>;

/// Lazily enumerates contiguous partitions of 0..n-1 whose blocks all have
/// sizes that are multiples of block_size_multiple, except the final block,
/// which may be any size >= 1. Order is depth-first over the sizes of the
/// non-final blocks, shorter prefixes first: [], [m], [m, m], ..., [2m], ...
class PartitionEnumerator {
 public:
  PartitionEnumerator(std::int64_t n, int block_size_multiple);

  /// Writes the next partition into `out`; false when exhausted.
  bool next(Partition& out);

 private:
  bool advance();

  std::int64_t n_;
  std::int64_t multiple_;
  std::vector<std::int64_t> prefix_;  // sizes of the non-final blocks
  bool started_ = false;
  bool done_ = false;
};

/// All partitions, eagerly (for tests and small n).
std::vector<Partition> enumerate_partitions(std::int64_t n, int block_size_multiple);

/// Exact number of (partition, per-block mp) candidates brute_force evaluates.
SpaceSize candidate_count(std::int64_t n, const SearchSpaceSpec& spec);

struct SearchResult {
  Schedule best;
  double best_latency_ms = 0.0;
  std::uint64_t candidates_evaluated = 0;
  double wall_time_s = 0.0;
};

/// Evaluates every candidate and keeps the minimum latency; ties go to fewer
/// blocks, then the lexicographically smaller mp vector. Throws
/// SpaceTooLargeError before evaluating anything when the count exceeds
/// spec.max_candidates. `threads` = 0 picks hardware concurrency.
SearchResult brute_force(const NetworkIR& net, const CostModelConfig& cfg,
                         const SearchSpaceSpec& spec, unsigned threads = 0);

}  // namespace dlfusion
