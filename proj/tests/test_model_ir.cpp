#include <gtest/gtest.h>

#include "dlfusion/error.hpp"
#include "dlfusion/model_ir.hpp"

using namespace dlfusion;

namespace {

const char* kTiny = R"({"name": "tiny", "layers": [
  {"id": 0, "type": "conv", "c_in": 3, "c_out": 8, "h_out": 4, "w_out": 4, "k_h": 3, "k_w": 3},
  {"id": 1, "type": "relu"},
  {"id": 2, "type": "fc", "m": 1, "k": 128, "n": 10}
]})";

}  // namespace

TEST(ModelIr, ParsesAndFillsDefaults) {
  const auto net = parse_network(kTiny);
  EXPECT_EQ(net.name, "tiny");
  ASSERT_EQ(net.layers.size(), 3u);
  ASSERT_TRUE(net.layers[0].conv);
  EXPECT_EQ(net.layers[0].conv->stride, 1);
  EXPECT_EQ(net.layers[0].conv->padding, 1);
  EXPECT_EQ(net.layers[0].conv->h_in(), 4);
  EXPECT_EQ(net.layers[1].kind, LayerKind::ReLU);
  EXPECT_FALSE(net.layers[1].is_compute());
  EXPECT_EQ(net.layers[2].fc->n, 10);
  EXPECT_EQ(compute_layers(net).size(), 2u);
}

TEST(ModelIr, RoundTripsLosslessly) {
  const auto net = parse_network(kTiny);
  const auto text = serialize_network(net);
  EXPECT_EQ(parse_network(text), net);
  EXPECT_EQ(serialize_network(parse_network(text)), text);
}

TEST(ModelIr, FixturesRoundTrip) {
  for (const char* name : {"resnet18", "vgg19", "alexnet", "mobilenet", "resnet50"}) {
    const auto net = load_network(std::string(DLFUSION_FIXTURE_DIR) + "/" + name + ".json");
    EXPECT_EQ(parse_network(serialize_network(net)), net) << name;
    EXPECT_TRUE(validate_network(net).empty()) << name;
  }
}

TEST(ModelIr, ConvKeysOnReluAreValidationErrors) {
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [
      {"id": 0, "type": "conv", "c_in": 1, "c_out": 1, "h_out": 1, "w_out": 1, "k_h": 1, "k_w": 1},
      {"id": 1, "type": "relu", "c_in": 4}]})"),
               ValidationError);
}

TEST(ModelIr, SchemaErrors) {
  EXPECT_THROW(parse_network("not json"), SchemaError);
  EXPECT_THROW(parse_network(R"({"name": "x"})"), SchemaError);
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [], "extra": 1})"), SchemaError);
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [{"id": 0, "type": "conv"}]})"),
               SchemaError);
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [{"id": 0, "type": "softmax"}]})"),
               SchemaError);
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [
      {"id": 0, "type": "fc", "m": 1, "k": 2.5, "n": 3}]})"),
               SchemaError);
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [
      {"id": 0, "type": "fc", "m": 1, "k": 2, "n": 3, "bias": true}]})"),
               SchemaError);
}

TEST(ModelIr, EmptyNetworks) {
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": []})"), EmptyNetworkError);
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [{"id": 0, "type": "relu"}]})"),
               EmptyNetworkError);
}

TEST(ModelIr, InvariantViolations) {
  // Negative channels, zero stride and non-consecutive ids are all reported.
  try {
    parse_network(R"({"name": "x", "layers": [
      {"id": 0, "type": "conv", "c_in": -1, "c_out": 1, "h_out": 1, "w_out": 1, "k_h": 1, "k_w": 1, "stride": 0},
      {"id": 5, "type": "relu"}]})");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("c_in"), std::string::npos);
    EXPECT_NE(msg.find("stride"), std::string::npos);
    EXPECT_NE(msg.find("layer 5"), std::string::npos);
  }
}

TEST(ModelIr, PaddingTooLargeForInput) {
  EXPECT_THROW(parse_network(R"({"name": "x", "layers": [
      {"id": 0, "type": "conv", "c_in": 1, "c_out": 1, "h_out": 1, "w_out": 1, "k_h": 1, "k_w": 1, "padding": 3}]})"),
               ValidationError);
}

TEST(ModelIr, MissingFileNamesPath) {
  try {
    load_network("/nonexistent/net.json");
    FAIL();
  } catch (const InputFileError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/net.json"), std::string::npos);
  }
}

TEST(ModelIr, KindNames) {
  for (auto k : {LayerKind::Conv, LayerKind::FullyConnected, LayerKind::ReLU, LayerKind::BatchNorm,
                 LayerKind::Pool, LayerKind::Add}) {
    EXPECT_EQ(layer_kind_from_string(to_string(k)), k);
  }
  EXPECT_FALSE(layer_kind_from_string("Conv"));
}
