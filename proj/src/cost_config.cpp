#include "dlfusion/cost_config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "dlfusion/error.hpp"

namespace dlfusion {

using nlohmann::json;

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

double get_number(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number()) throw SchemaError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

int get_int(const json& doc, const char* key) {
  const auto& v = doc.at(key);
  if (!v.is_number_integer()) {
    throw SchemaError(std::string("config key '") + key + "' must be an integer");
  }
  return v.get<int>();
}

}  // namespace

std::string_view to_string(RoundMode mode) {
  return mode == RoundMode::Floor ? "floor" : "nearest";
}

std::vector<std::string> validate_config(const CostModelConfig& c) {
  std::vector<std::string> out;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) out.push_back(std::string(name) + " must be > 0");
  };
  if (!is_power_of_two(c.num_cores) || c.num_cores > 1024) {
    out.push_back("num_cores must be a power of two ≤ 1024");
  }
  positive("peak_gflops_per_core", c.peak_gflops_per_core);
  positive("bandwidth_gbs", c.bandwidth_gbs);
  positive("bytes_per_element", c.bytes_per_element);
  positive("opcount_critical_gops", c.opcount_critical_gops);
  positive("gamma", c.gamma);
  positive("min_channel_partition", c.min_channel_partition);
  if (!(c.alpha >= 0.0) || !(c.beta >= 0.0) || !(c.alpha + c.beta > 0.0) ||
      !std::isfinite(c.alpha + c.beta)) {
    out.push_back("alpha and beta must be ≥ 0 and not both 0");
  }
  positive("mp_map_scale", c.mp_map_scale);
  positive("calibration_l1", c.calibration_l1);
  if (!std::isfinite(c.mp_map_bias)) out.push_back("mp_map_bias must be finite");
  if (c.fusion_threshold_gops) positive("fusion_threshold_gops", *c.fusion_threshold_gops);
  return out;
}

CostModelConfig config_from_json(const json& doc, CostModelConfig c) {
  if (!doc.is_object()) throw SchemaError("cost model config must be a JSON object");
  static const std::set<std::string> known{
      "num_cores",     "peak_gflops_per_core", "bandwidth_gbs",   "bytes_per_element",
      "opcount_critical_gops", "gamma",        "min_channel_partition", "alpha",
      "beta",          "mp_map_scale",         "mp_map_bias",     "calibration_l1",
      "fusion_threshold_gops", "round_mode"};
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (!known.count(it.key())) throw SchemaError("unknown config key '" + it.key() + "'");
  }
  if (doc.contains("num_cores")) c.num_cores = get_int(doc, "num_cores");
  if (doc.contains("peak_gflops_per_core")) c.peak_gflops_per_core = get_number(doc, "peak_gflops_per_core");
  if (doc.contains("bandwidth_gbs")) c.bandwidth_gbs = get_number(doc, "bandwidth_gbs");
  if (doc.contains("bytes_per_element")) c.bytes_per_element = get_int(doc, "bytes_per_element");
  if (doc.contains("opcount_critical_gops")) c.opcount_critical_gops = get_number(doc, "opcount_critical_gops");
  if (doc.contains("gamma")) c.gamma = get_number(doc, "gamma");
  if (doc.contains("min_channel_partition")) c.min_channel_partition = get_int(doc, "min_channel_partition");
  if (doc.contains("alpha")) c.alpha = get_number(doc, "alpha");
  if (doc.contains("beta")) c.beta = get_number(doc, "beta");
  if (doc.contains("mp_map_scale")) c.mp_map_scale = get_number(doc, "mp_map_scale");
  if (doc.contains("mp_map_bias")) c.mp_map_bias = get_number(doc, "mp_map_bias");
  if (doc.contains("calibration_l1")) c.calibration_l1 = get_number(doc, "calibration_l1");
  if (doc.contains("fusion_threshold_gops")) {
    if (doc["fusion_threshold_gops"].is_null()) {
      c.fusion_threshold_gops.reset();
    } else {
      c.fusion_threshold_gops = get_number(doc, "fusion_threshold_gops");
    }
  }
  if (doc.contains("round_mode")) {
    const auto& v = doc["round_mode"];
    if (v == "floor") {
      c.round_mode = RoundMode::Floor;
    } else if (v == "nearest") {
      c.round_mode = RoundMode::Nearest;
    } else {
      throw SchemaError("round_mode must be \"floor\" or \"nearest\"");
    }
  }
  auto violations = validate_config(c);
  if (!violations.empty()) throw ValidationError("invalid cost model config: " + violations.front());
  return c;
}

json config_to_json(const CostModelConfig& c) {
  json doc = {
      {"num_cores", c.num_cores},
      {"peak_gflops_per_core", c.peak_gflops_per_core},
      {"bandwidth_gbs", c.bandwidth_gbs},
      {"bytes_per_element", c.bytes_per_element},
      {"opcount_critical_gops", c.opcount_critical_gops},
      {"gamma", c.gamma},
      {"min_channel_partition", c.min_channel_partition},
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"mp_map_scale", c.mp_map_scale},
      {"mp_map_bias", c.mp_map_bias},
      {"calibration_l1", c.calibration_l1},
      {"round_mode", std::string(to_string(c.round_mode))},
  };
  if (c.fusion_threshold_gops) doc["fusion_threshold_gops"] = *c.fusion_threshold_gops;
  return doc;
}

CostModelConfig load_config(const std::filesystem::path& path, CostModelConfig base) {
  std::ifstream in(path);
  if (!in) throw InputFileError("cannot read config file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError("config file '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc, base);
}

}  // namespace dlfusion
