#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dlfusion {

enum class LayerKind { Conv, FullyConnected, ReLU, BatchNorm, Pool, Add };

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> layer_kind_from_string(std::string_view name);

/// Convolution shape in the {C_in, C_out, H x W, K x K} notation, keyed to
/// the output feature map. Input size is reconstructed from stride/padding.
struct ConvParams {
  std::int64_t c_in = 1;
  std::int64_t c_out = 1;
  std::int64_t h_out = 1;
  std::int64_t w_out = 1;
  std::int64_t k_h = 1;
  std::int64_t k_w = 1;
  std::int64_t stride = 1;
  std::int64_t padding = 0;

  std::int64_t h_in() const { return (h_out - 1) * stride + k_h - 2 * padding; }
  std::int64_t w_in() const { return (w_out - 1) * stride + k_w - 2 * padding; }

  bool operator==(const ConvParams&) const = default;
};

/// Square conv with "same" padding, the shape used by most sweeps and tests.
ConvParams make_conv(std::int64_t c_in, std::int64_t c_out, std::int64_t hw,
                     std::int64_t k, std::int64_t stride = 1);

struct FcParams {
  std::int64_t m = 1;
  std::int64_t k = 1;
  std::int64_t n = 1;

  bool operator==(const FcParams&) const = default;
};

struct Layer {
  std::int64_t id = 0;
  LayerKind kind = LayerKind::ReLU;
  std::optional<ConvParams> conv;
  std::optional<FcParams> fc;

  /// Conv and FC carry op counts and MP votes; everything else is attached.
  bool is_compute() const {
    return kind == LayerKind::Conv || kind == LayerKind::FullyConnected;
  }

  /// Channel count used for MP selection: c_out for conv, n for FC.
  std::int64_t channels() const;

  bool operator==(const Layer&) const = default;
};

Layer conv_layer(std::int64_t id, const ConvParams& p);
Layer fc_layer(std::int64_t id, const FcParams& p);
Layer attached_layer(std::int64_t id, LayerKind kind);

/// Linear chain of layers. Immutable once parsed.
struct NetworkIR {
  std::string name;
  std::vector<Layer> layers;

  bool operator==(const NetworkIR&) const = default;
};

/// Parse a network description document (JSON). Throws SchemaError,
/// ValidationError or EmptyNetworkError.
NetworkIR parse_network(std::string_view text);

/// Read and parse a file. Throws InputFileError when it cannot be read.
NetworkIR load_network(const std::filesystem::path& path);

/// Canonical JSON rendering; parse_network(serialize_network(n)) == n.
std::string serialize_network(const NetworkIR& net);

/// Every invariant violation, each naming the layer and rule. Empty iff valid.
std::vector<std::string> validate_network(const NetworkIR& net);

/// Order-preserving filter to Conv/FC layers.
std::vector<Layer> compute_layers(const NetworkIR& net);

}  // namespace dlfusion
