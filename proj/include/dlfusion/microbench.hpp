#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/model_ir.hpp"
#include "dlfusion/mp_select.hpp"

namespace dlfusion {

/// Axes of a synthetic conv sweep. Every layer is square with c_in == c_out.
struct SweepSpec {
  std::vector<std::int64_t> channel_range;
  std::vector<std::int64_t> spatial_range;
  std::vector<std::int64_t> kernel_range;
  std::vector<int> mp_values;
};

/// Size of the Cartesian product channel x spatial x kernel.
std::uint64_t sweep_size(const SweepSpec& spec);

/// Cartesian product in channel-major order, skipping non-positive values.
/// Throws ValidationError when nothing is left.
std::vector<ConvParams> generate_sweep(const SweepSpec& spec);

/// Per layer, the power-of-two mp in [1, num_cores] minimizing the unfused
/// single-layer latency (smaller mp on ties). Sorted by (c_out, op_gops, best_mp).
std::vector<ProfileRecord> synthesize_profiles(const std::vector<ConvParams>& layers,
                                               const CostModelConfig& cfg,
                                               unsigned threads = 0);

struct CurvePoint {
  std::int64_t c_out = 0;
  std::int64_t h_out = 0;
  std::int64_t k = 0;
  int mp = 1;
  double gflops = 0.0;

  bool operator==(const CurvePoint&) const = default;
};

/// Predicted GFLOPS (exact gops / latency in seconds) of every layer at every
/// mp in `mp_values`, in layer-major order.
std::vector<CurvePoint> sweep_curves(const std::vector<ConvParams>& layers,
                                     const std::vector<int>& mp_values,
                                     const CostModelConfig& cfg);

/// CSV with header `c_out,h_out,k,mp,gflops`.
void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points);
std::vector<CurvePoint> read_curves_csv(std::istream& in);

}  // namespace dlfusion
