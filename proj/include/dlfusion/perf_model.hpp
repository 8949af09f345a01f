#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/model_ir.hpp"
#include "dlfusion/opcount.hpp"
#include "dlfusion/schedule.hpp"

namespace dlfusion {

/// Latencies closer than this (relative) are treated as ties by every argmin
/// in the library, so plateau noise never decides a winner.
inline constexpr double kTieTolerance = 1e-12;

/// a < b by more than the tie tolerance.
bool definitely_less(double a, double b);

struct TileGrid {
  int rows = 1;
  int cols = 1;

  bool operator==(const TileGrid&) const = default;
};

/// Spatial split of an h x w output across mp cores: rows * cols == mp, the
/// most balanced factor pair, larger factor on the longer axis (rows on ties).
/// For powers of two both factors are powers of two within one doubling.
TileGrid tile_grid(int mp, std::int64_t h, std::int64_t w);

struct HaloOptions {
  /// Exact backward propagation through strided layers. When false, a strided
  /// layer downstream of another layer raises UnsupportedStrideError.
  bool exact_stride = true;
};

/// Per-layer element counts of one conv chain split over a tile grid.
struct HaloCounts {
  std::vector<std::uint64_t> computed;  // sum over tiles of computed output pixels
  std::vector<std::uint64_t> unfused;   // h_out * w_out
};

/// Backward receptive-field propagation over a chain of convs whose final
/// output is tiled with tile_grid(mp). Rows and columns propagate as exact
/// index sets, so a strided 1x1 layer only pulls every s-th row.
HaloCounts halo_counts(std::span<const ConvParams> chain, int mp, HaloOptions opt = {});

struct LayerRedundancy {
  std::int64_t layer_id = 0;
  double factor = 1.0;

  bool operator==(const LayerRedundancy&) const = default;
};

struct RedundancyReport {
  std::vector<LayerRedundancy> per_layer;
  OpCount effective_ops;

  bool operator==(const RedundancyReport&) const = default;
};

/// Redundancy of a fused block split spatially over mp cores. Each maximal
/// run of convs (FC layers end a run) is tiled on its own last layer.
/// Factors are computed/unfused, floored at 1.0: pixels no tile needs are
/// still charged once.
RedundancyReport halo_redundancy(std::span<const Layer> block, int mp, HaloOptions opt = {});

/// min(1, (per_core_gops / critical)^gamma).
double single_core_efficiency(double per_core_gops, const CostModelConfig& cfg);

/// min(1, (channels / mp) / min_channel_partition).
double channel_efficiency(std::int64_t channels, int mp, const CostModelConfig& cfg);

/// Fused: first compute layer's input + all weights + last compute layer's
/// output. Unfused: sum of per-layer tensor_bytes.
std::uint64_t block_memory_bytes(std::span<const Layer> block, bool fused,
                                 const CostModelConfig& cfg);

struct CostBreakdown {
  double compute_ms = 0.0;
  double memory_ms = 0.0;
  double latency_ms = 0.0;
  RedundancyReport redundancy;
  OpCount exact_ops;
  double per_core_gops = 0.0;
  double efficiency = 1.0;
  int mp = 1;

  bool operator==(const CostBreakdown&) const = default;
};

/// Roofline latency of one block on mp cores.
CostBreakdown block_cost(std::span<const Layer> block, int mp, bool fused,
                         const CostModelConfig& cfg, HaloOptions opt = {});

struct Prediction {
  double total_ms = 0.0;
  double fps = 0.0;
  std::vector<CostBreakdown> blocks;
};

/// Sum of block latencies for a schedule covering `net`; fps at batch 1.
Prediction predict_schedule(const NetworkIR& net, const Schedule& schedule,
                            const CostModelConfig& cfg);

/// Layers [first, last] of `net` as a contiguous span.
std::span<const Layer> layer_range(const NetworkIR& net, std::int64_t first, std::int64_t last);

/// Power-of-two MPs 1, 2, ..., num_cores.
std::vector<int> power_of_two_mps(const CostModelConfig& cfg);

/// argmin of block_cost latency over `candidates`; ties go to the smaller mp.
int best_mp(std::span<const Layer> block, bool fused, const CostModelConfig& cfg,
            std::span<const int> candidates);

}  // namespace dlfusion
