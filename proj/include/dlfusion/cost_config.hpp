#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dlfusion {

/// How a fusion block's mean MP vote is mapped onto the power-of-two lattice.
enum class RoundMode { Floor, Nearest };

std::string_view to_string(RoundMode mode);

/// Parametric description of a multi-core accelerator plus the tunables of
/// the MP selector and the fusion pass. Defaults describe an MLU-100-class
/// part (32 cores, 64 TFLOPS FP16, 102.4 GB/s).
struct CostModelConfig {
  int num_cores = 32;
  double peak_gflops_per_core = 2000.0;
  double bandwidth_gbs = 102.4;
  int bytes_per_element = 2;
  /// Per-core op count (GOPs) at which single-core efficiency saturates: 10^1.25.
  double opcount_critical_gops = 17.782794100389228;
  /// Exponent of the efficiency ramp below the critical point.
  double gamma = 0.75;
  int min_channel_partition = 4;

  double alpha = 0.316;
  double beta = 0.659;
  double mp_map_scale = 0.25;
  double mp_map_bias = -1.95;
  /// L1 norm that calibrate() scales (alpha, beta) to.
  double calibration_l1 = 0.975;

  /// Fusion threshold; falls back to opcount_critical_gops when unset.
  std::optional<double> fusion_threshold_gops;
  RoundMode round_mode = RoundMode::Nearest;

  double threshold_gops() const {
    return fusion_threshold_gops.value_or(opcount_critical_gops);
  }

  bool operator==(const CostModelConfig&) const = default;
};

/// Invariant violations (empty when valid).
std::vector<std::string> validate_config(const CostModelConfig& cfg);

/// Overlay the fields present in `doc` on top of `base`. Unknown keys and
/// wrong types are SchemaError; an invalid result is ValidationError.
CostModelConfig config_from_json(const nlohmann::json& doc, CostModelConfig base = {});
nlohmann::json config_to_json(const CostModelConfig& cfg);

CostModelConfig load_config(const std::filesystem::path& path, CostModelConfig base = {});

}  // namespace dlfusion
