#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/error.hpp"

using namespace dlfusion;
using nlohmann::json;

TEST(CostConfig, DefaultsAreValid) {
  const CostModelConfig cfg;
  EXPECT_TRUE(validate_config(cfg).empty());
  EXPECT_EQ(cfg.num_cores, 32);
  EXPECT_DOUBLE_EQ(cfg.peak_gflops_per_core * cfg.num_cores, 64000.0);
  EXPECT_DOUBLE_EQ(cfg.threshold_gops(), cfg.opcount_critical_gops);
  EXPECT_NEAR(std::log10(cfg.opcount_critical_gops), 1.25, 1e-12);
}

TEST(CostConfig, OverlayKeepsUnsetFields) {
  const auto cfg = config_from_json(json{{"num_cores", 16}, {"fusion_threshold_gops", 2.5}});
  EXPECT_EQ(cfg.num_cores, 16);
  EXPECT_DOUBLE_EQ(cfg.threshold_gops(), 2.5);
  EXPECT_DOUBLE_EQ(cfg.bandwidth_gbs, CostModelConfig{}.bandwidth_gbs);
}

TEST(CostConfig, JsonRoundTrip) {
  CostModelConfig cfg;
  cfg.gamma = 0.5;
  cfg.round_mode = RoundMode::Floor;
  cfg.fusion_threshold_gops = 1.0;
  EXPECT_EQ(config_from_json(config_to_json(cfg)), cfg);
  EXPECT_EQ(config_from_json(config_to_json(CostModelConfig{})), CostModelConfig{});
}

TEST(CostConfig, Errors) {
  EXPECT_THROW(config_from_json(json{{"cores", 4}}), SchemaError);
  EXPECT_THROW(config_from_json(json{{"num_cores", "four"}}), SchemaError);
  EXPECT_THROW(config_from_json(json{{"round_mode", "up"}}), SchemaError);
  EXPECT_THROW(config_from_json(json{{"num_cores", 12}}), ValidationError);
  EXPECT_THROW(config_from_json(json{{"bandwidth_gbs", -1.0}}), ValidationError);
  EXPECT_THROW(config_from_json(json{{"fusion_threshold_gops", 0.0}}), ValidationError);
  EXPECT_THROW(config_from_json(json{{"beta", -0.1}}), ValidationError);
  EXPECT_THROW(config_from_json(json{{"alpha", 0.0}, {"beta", 0.0}}), ValidationError);
  EXPECT_NO_THROW(config_from_json(json{{"alpha", 0.975}, {"beta", 0.0}}));
  EXPECT_THROW(load_config("/nonexistent/cost.json"), InputFileError);
}

TEST(CostConfig, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "dlfusion_cost_test.json";
  std::ofstream(path) << R"({"gamma": 1.0, "round_mode": "floor"})";
  const auto cfg = load_config(path);
  EXPECT_DOUBLE_EQ(cfg.gamma, 1.0);
  EXPECT_EQ(cfg.round_mode, RoundMode::Floor);
  std::filesystem::remove(path);
}
