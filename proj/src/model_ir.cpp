#include "dlfusion/model_ir.hpp"

#include <array>
#include <fstream>
#include <sstream>

#include "dlfusion/error.hpp"
#include "json.hpp"

namespace dlfusion {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 6> kKindNames{{
    {LayerKind::Conv, "conv"},
    {LayerKind::FullyConnected, "fc"},
    {LayerKind::ReLU, "relu"},
    {LayerKind::BatchNorm, "batchnorm"},
    {LayerKind::Pool, "pool"},
    {LayerKind::Add, "add"},
}};

constexpr std::array<std::string_view, 6> kConvRequired{"c_in", "c_out", "h_out",
                                                        "w_out", "k_h", "k_w"};
constexpr std::array<std::string_view, 2> kConvOptional{"stride", "padding"};
constexpr std::array<std::string_view, 3> kFcRequired{"m", "k", "n"};

bool is_conv_key(std::string_view key) {
  for (auto k : kConvRequired) {
    if (k == key) return true;
  }
  for (auto k : kConvOptional) {
    if (k == key) return true;
  }
  return false;
}

bool is_fc_key(std::string_view key) {
  for (auto k : kFcRequired) {
    if (k == key) return true;
  }
  return false;
}

std::int64_t require_int(const json& obj, std::string_view key, std::size_t index) {
  auto it = obj.find(std::string(key));
  if (it == obj.end()) {
    throw SchemaError("layers[" + std::to_string(index) + "]: missing required key '" +
                      std::string(key) + "'");
  }
  if (!it->is_number_integer()) {
    throw SchemaError("layers[" + std::to_string(index) + "]: key '" + std::string(key) +
                      "' must be an integer");
  }
  return it->get<std::int64_t>();
}

Layer parse_layer(const json& obj, std::size_t index) {
  const std::string where = "layers[" + std::to_string(index) + "]";
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");

  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const auto& key = it.key();
    if (key != "id" && key != "type" && !is_conv_key(key) && !is_fc_key(key)) {
      throw SchemaError(where + ": unknown key '" + key + "'");
    }
  }
  if (!obj.contains("type") || !obj["type"].is_string()) {
    throw SchemaError(where + ": 'type' must be a string");
  }
  auto kind = layer_kind_from_string(obj["type"].get<std::string>());
  if (!kind) {
    throw SchemaError(where + ": unknown layer type '" + obj["type"].get<std::string>() + "'");
  }

  Layer layer;
  layer.id = require_int(obj, "id", index);
  layer.kind = *kind;

  // Shape keys that belong to another layer kind are invariant violations,
  // not schema errors: the keys themselves are known.
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const auto& key = it.key();
    if (is_conv_key(key) && layer.kind != LayerKind::Conv) {
      throw ValidationError("layer " + std::to_string(layer.id) + ": conv parameter '" + key +
                            "' on a " + std::string(to_string(layer.kind)) + " layer");
    }
    if (is_fc_key(key) && layer.kind != LayerKind::FullyConnected) {
      throw ValidationError("layer " + std::to_string(layer.id) + ": fc parameter '" + key +
                            "' on a " + std::string(to_string(layer.kind)) + " layer");
    }
  }

  if (layer.kind == LayerKind::Conv) {
    ConvParams p;
    p.c_in = require_int(obj, "c_in", index);
    p.c_out = require_int(obj, "c_out", index);
    p.h_out = require_int(obj, "h_out", index);
    p.w_out = require_int(obj, "w_out", index);
    p.k_h = require_int(obj, "k_h", index);
    p.k_w = require_int(obj, "k_w", index);
    p.stride = obj.contains("stride") ? require_int(obj, "stride", index) : 1;
    p.padding = obj.contains("padding") ? require_int(obj, "padding", index) : (p.k_h - 1) / 2;
    layer.conv = p;
  } else if (layer.kind == LayerKind::FullyConnected) {
    FcParams p;
    p.m = require_int(obj, "m", index);
    p.k = require_int(obj, "k", index);
    p.n = require_int(obj, "n", index);
    layer.fc = p;
  }
  return layer;
}

void check_positive(std::vector<std::string>& out, std::int64_t id, std::string_view field,
                    std::int64_t value) {
  if (value < 1) {
    out.push_back("layer " + std::to_string(id) + ": " + std::string(field) +
                  " must be ≥ 1");
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<LayerKind> layer_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

ConvParams make_conv(std::int64_t c_in, std::int64_t c_out, std::int64_t hw, std::int64_t k,
                     std::int64_t stride) {
  return ConvParams{c_in, c_out, hw, hw, k, k, stride, (k - 1) / 2};
}

std::int64_t Layer::channels() const {
  if (conv) return conv->c_out;
  if (fc) return fc->n;
  return 0;
}

Layer conv_layer(std::int64_t id, const ConvParams& p) {
  return Layer{id, LayerKind::Conv, p, std::nullopt};
}

Layer fc_layer(std::int64_t id, const FcParams& p) {
  return Layer{id, LayerKind::FullyConnected, std::nullopt, p};
}

Layer attached_layer(std::int64_t id, LayerKind kind) {
  return Layer{id, kind, std::nullopt, std::nullopt};
}

std::vector<std::string> validate_network(const NetworkIR& net) {
  std::vector<std::string> out;
  bool any_compute = false;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    const auto id = l.id;
    if (l.id != static_cast<std::int64_t>(i)) {
      out.push_back("layer " + std::to_string(id) + ": id must equal its position " +
                    std::to_string(i) + " (ids are 0..n-1 in order)");
    }
    any_compute = any_compute || l.is_compute();

    const bool wants_conv = l.kind == LayerKind::Conv;
    const bool wants_fc = l.kind == LayerKind::FullyConnected;
    if (wants_conv != l.conv.has_value()) {
      out.push_back("layer " + std::to_string(id) +
                    (wants_conv ? ": conv layer requires conv parameters"
                                : ": conv parameters only allowed on conv layers"));
    }
    if (wants_fc != l.fc.has_value()) {
      out.push_back("layer " + std::to_string(id) +
                    (wants_fc ? ": fc layer requires m/k/n" : ": m/k/n only allowed on fc layers"));
    }
    if (l.conv) {
      const auto& p = *l.conv;
      check_positive(out, id, "c_in", p.c_in);
      check_positive(out, id, "c_out", p.c_out);
      check_positive(out, id, "h_out", p.h_out);
      check_positive(out, id, "w_out", p.w_out);
      check_positive(out, id, "k_h", p.k_h);
      check_positive(out, id, "k_w", p.k_w);
      check_positive(out, id, "stride", p.stride);
      if (p.padding < 0) {
        out.push_back("layer " + std::to_string(id) + ": padding must be ≥ 0");
      }
      if (p.stride >= 1 && p.h_out >= 1 && p.w_out >= 1 && p.k_h >= 1 && p.k_w >= 1 &&
          p.padding >= 0 && (p.h_in() < 1 || p.w_in() < 1)) {
        out.push_back("layer " + std::to_string(id) +
                      ": reconstructed input size must be ≥ 1 (padding too large)");
      }
    }
    if (l.fc) {
      check_positive(out, id, "m", l.fc->m);
      check_positive(out, id, "k", l.fc->k);
      check_positive(out, id, "n", l.fc->n);
    }
  }
  if (!any_compute) out.push_back("network: at least one conv or fc layer is required");
  return out;
}

NetworkIR parse_network(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("network document must be a JSON object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "name" && it.key() != "layers") {
      throw SchemaError("unknown top-level key '" + it.key() + "'");
    }
  }
  if (!doc.contains("name") || !doc["name"].is_string()) {
    throw SchemaError("'name' must be a string");
  }
  if (!doc.contains("layers") || !doc["layers"].is_array()) {
    throw SchemaError("'layers' must be an array");
  }

  NetworkIR net;
  net.name = doc["name"].get<std::string>();
  const auto& layers = doc["layers"];
  if (layers.empty()) throw EmptyNetworkError("network '" + net.name + "' has no layers");
  net.layers.reserve(layers.size());
  for (std::size_t i = 0; i < layers.size(); ++i) net.layers.push_back(parse_layer(layers[i], i));

  if (compute_layers(net).empty()) {
    throw EmptyNetworkError("network '" + net.name + "' has no conv or fc layers");
  }
  auto violations = validate_network(net);
  if (!violations.empty()) {
    std::string msg = violations.front();
    for (std::size_t i = 1; i < violations.size(); ++i) msg += "; " + violations[i];
    throw ValidationError(msg);
  }
  return net;
}

NetworkIR load_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputFileError("cannot read network file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_network(ss.str());
}

std::string serialize_network(const NetworkIR& net) {
  std::ostringstream out;
  out << "{\n  \"name\": " << json(net.name).dump() << ",\n  \"layers\": [";
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    const Layer& l = net.layers[i];
    // One layer per line with id/type first; nlohmann would sort the keys.
    out << (i == 0 ? "\n" : ",\n") << "    {\"id\": " << l.id << ", \"type\": \""
        << to_string(l.kind) << "\"";
    if (l.conv) {
      const auto& p = *l.conv;
      out << ", \"c_in\": " << p.c_in << ", \"c_out\": " << p.c_out << ", \"h_out\": " << p.h_out
          << ", \"w_out\": " << p.w_out << ", \"k_h\": " << p.k_h << ", \"k_w\": " << p.k_w
          << ", \"stride\": " << p.stride << ", \"padding\": " << p.padding;
    }
    if (l.fc) {
      out << ", \"m\": " << l.fc->m << ", \"k\": " << l.fc->k << ", \"n\": " << l.fc->n;
    }
    out << "}";
  }
  out << "\n  ]\n}\n";
  return out.str();
}

std::vector<Layer> compute_layers(const NetworkIR& net) {
  std::vector<Layer> out;
  for (const auto& l : net.layers) {
    if (l.is_compute()) out.push_back(l);
  }
  return out;
}

}  // namespace dlfusion
