#pragma once

#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/model_ir.hpp"

namespace dlfusion {

struct MpScore {
  double score = 0.0;
  std::int64_t layer_id = 0;
};

struct MpChoice {
  int mp = 1;
  MpScore score;
};

/// alpha * log2(C) + beta * log2(ops), C = c_out (FC: n), ops in elementary ops.
MpScore mp_score(const Layer& layer, const CostModelConfig& cfg);

/// Largest power of two with at least min_channel_partition channels per core,
/// capped at num_cores.
int channel_mp_cap(std::int64_t channels, const CostModelConfig& cfg);

/// 2^round(scale * score + bias), round half to even, clamped to
/// [1, num_cores] and to the channel cap.
MpChoice score_to_mp(const MpScore& score, const Layer& layer, const CostModelConfig& cfg);

/// score_to_mp(mp_score(layer)).
MpChoice optimal_mp(const Layer& layer, const CostModelConfig& cfg);

/// One profiled layer: its output channels, op count and the fastest MP.
/// best_mp is real so planted (non-lattice) data can be represented.
struct ProfileRecord {
  std::int64_t c_out = 1;
  double op_gops = 0.0;
  double best_mp = 1.0;

  bool operator==(const ProfileRecord&) const = default;
};

enum class CalibrationMethod { LeastSquares, Pca };

struct Calibration {
  double alpha = 0.0;
  double beta = 0.0;
  double mp_map_scale = 0.0;
  double mp_map_bias = 0.0;
  /// RMS residual of log2(best_mp) against the fitted map.
  double rms_residual = 0.0;
};

/// Fits (alpha, beta, scale, bias) so that log2(best_mp) ~ scale * score + bias.
/// Records are sorted first so the result does not depend on input order.
Calibration calibrate(std::vector<ProfileRecord> profiles, CalibrationMethod method,
                      double l1_norm = 0.975);

/// Writes the fitted values into a copy of `cfg`.
CostModelConfig apply_calibration(const CostModelConfig& cfg, const Calibration& cal);

/// CSV with header `c_out,op_gops,best_mp`.
std::vector<ProfileRecord> read_profiles_csv(std::istream& in);
void write_profiles_csv(std::ostream& out, const std::vector<ProfileRecord>& profiles);

}  // namespace dlfusion
