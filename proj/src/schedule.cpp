#include "dlfusion/schedule.hpp"

#include <cstdio>
#include <sstream>

#include "dlfusion/error.hpp"
#include "json.hpp"

namespace dlfusion {

using nlohmann::json;

void check_coverage(const NetworkIR& net, const Schedule& schedule) {
  std::int64_t next = 0;
  for (std::size_t b = 0; b < schedule.blocks.size(); ++b) {
    const auto& ids = schedule.blocks[b].layer_ids;
    if (ids.empty()) throw CoverageError("block " + std::to_string(b) + " is empty");
    for (auto id : ids) {
      if (id != next) {
        throw CoverageError("block " + std::to_string(b) + ": expected layer " +
                            std::to_string(next) + ", found " + std::to_string(id) +
                            " (blocks must cover every layer once, in order)");
      }
      ++next;
    }
  }
  if (next != static_cast<std::int64_t>(net.layers.size())) {
    throw CoverageError("schedule covers " + std::to_string(next) + " of " +
                        std::to_string(net.layers.size()) + " layers");
  }
}

FusionBlock make_block(const NetworkIR& net, std::int64_t first, std::int64_t last, int mp,
                       double avg_mp) {
  FusionBlock b;
  b.mp = mp;
  b.avg_mp = avg_mp;
  for (auto i = first; i <= last; ++i) {
    b.layer_ids.push_back(i);
    b.sum_op.ops += layer_ops(net.layers[static_cast<std::size_t>(i)]).ops;
  }
  return b;
}

std::string schedule_to_json(const Schedule& s) {
  std::ostringstream out;
  out << "{\n  \"network\": " << json(s.network_name).dump()
      << ",\n  \"strategy\": " << json(s.strategy).dump() << ",\n  \"blocks\": [";
  for (std::size_t b = 0; b < s.blocks.size(); ++b) {
    const auto& blk = s.blocks[b];
    out << (b == 0 ? "\n" : ",\n") << "    {\"layers\": [";
    for (std::size_t i = 0; i < blk.layer_ids.size(); ++i) {
      out << (i ? ", " : "") << blk.layer_ids[i];
    }
    char gops[64];
    std::snprintf(gops, sizeof gops, "%.9g", blk.sum_op.gops());
    out << "], \"mp\": " << blk.mp << ", \"sum_op_gops\": " << gops << "}";
  }
  out << "\n  ]\n}\n";
  return out.str();
}

Schedule schedule_from_json(std::string_view text, const NetworkIR& net) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("invalid schedule JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("blocks") || !doc["blocks"].is_array()) {
    throw SchemaError("schedule must be an object with a 'blocks' array");
  }
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "network" && it.key() != "strategy" && it.key() != "blocks") {
      throw SchemaError("unknown schedule key '" + it.key() + "'");
    }
  }
  Schedule s;
  s.network_name = doc.value("network", net.name);
  s.strategy = doc.value("strategy", std::string("custom"));
  for (const auto& jb : doc["blocks"]) {
    if (!jb.is_object() || !jb.contains("layers") || !jb["layers"].is_array() ||
        !jb.contains("mp") || !jb["mp"].is_number_integer()) {
      throw SchemaError("each schedule block needs integer 'mp' and a 'layers' array");
    }
    for (auto it = jb.begin(); it != jb.end(); ++it) {
      if (it.key() != "layers" && it.key() != "mp" && it.key() != "sum_op_gops") {
        throw SchemaError("unknown schedule block key '" + it.key() + "'");
      }
    }
    FusionBlock b;
    b.mp = jb["mp"].get<int>();
    b.avg_mp = b.mp;
    for (const auto& id : jb["layers"]) {
      if (!id.is_number_integer()) throw SchemaError("layer ids must be integers");
      b.layer_ids.push_back(id.get<std::int64_t>());
    }
    s.blocks.push_back(std::move(b));
  }
  check_coverage(net, s);
  for (auto& b : s.blocks) {
    for (auto id : b.layer_ids) b.sum_op.ops += layer_ops(net.layers[static_cast<std::size_t>(id)]).ops;
  }
  return s;
}

}  // namespace dlfusion
