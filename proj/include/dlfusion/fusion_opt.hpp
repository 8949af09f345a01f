#pragma once

#include <optional>
#include <string_view>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/model_ir.hpp"
#include "dlfusion/schedule.hpp"

namespace dlfusion {

/// Optimization strategies compared in the evaluation table.
enum class Strategy {
  NoFusionMp1 = 1,        // one block per layer, mp 1
  NoFusionSharedMp = 2,   // one block per layer, one fixed mp
  NoFusionPerLayerMp = 3, // one block per layer, optimal_mp per layer
  FuseAllMaxMp = 4,       // a single block, mp = num_cores
  FusionSharedMp = 5,     // joint_opt partition, every block at one fixed mp
  DlFusion = 6,           // joint_opt
};

std::string_view strategy_label(Strategy s);

/// Maps the rounded mean vote of a block to a power of two per cfg.round_mode,
/// clamped to [1, num_cores].
int round_block_mp(double avg_mp, const CostModelConfig& cfg);

/// Single left-to-right pass that grows a fusion block until its per-core op
/// count (sum_op / mean MP vote) reaches the threshold, then closes it with
/// the rounded mean vote as its MP. Leading attached layers join the first
/// block, trailing layers are flushed as a final block. O(n).
/// threshold_gops defaults to cfg.threshold_gops().
Schedule joint_opt(const NetworkIR& net, const CostModelConfig& cfg,
                   std::optional<double> threshold_gops = std::nullopt);

/// Schedule for strategies 1-6. Strategies 2 and 5 need `mp`, a power of two
/// in [1, num_cores]. Throws InvalidStrategyError / InvalidMpError.
Schedule strategy_schedule(const NetworkIR& net, const CostModelConfig& cfg, int strategy,
                           std::optional<int> mp = std::nullopt,
                           std::optional<double> threshold_gops = std::nullopt);

}  // namespace dlfusion
