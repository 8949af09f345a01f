#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dlfusion/model_ir.hpp"
#include "dlfusion/opcount.hpp"

namespace dlfusion {

/// A contiguous run of layers executed as one unit on `mp` cores.
struct FusionBlock {
  std::vector<std::int64_t> layer_ids;
  int mp = 1;
  OpCount sum_op;
  /// Mean of the member compute layers' MP votes before rounding.
  double avg_mp = 1.0;

  bool fused() const { return layer_ids.size() > 1; }

  bool operator==(const FusionBlock&) const = default;
};

struct Schedule {
  std::string network_name;
  std::vector<FusionBlock> blocks;
  std::string strategy;

  bool operator==(const Schedule&) const = default;
};

/// Throws CoverageError unless the blocks partition 0..n-1 in order.
void check_coverage(const NetworkIR& net, const Schedule& schedule);

/// Schedule file: {"network", "strategy", "blocks": [{"layers", "mp", "sum_op_gops"}]}.
std::string schedule_to_json(const Schedule& schedule);

/// Parses a schedule file. sum_op and avg_mp are recomputed from `net`,
/// which must be covered exactly.
Schedule schedule_from_json(std::string_view text, const NetworkIR& net);

/// Builds a block over layers [first, last] and fills in sum_op.
FusionBlock make_block(const NetworkIR& net, std::int64_t first, std::int64_t last, int mp,
                       double avg_mp);

}  // namespace dlfusion
