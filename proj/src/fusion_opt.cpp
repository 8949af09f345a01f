#include "dlfusion/fusion_opt.hpp"

#include <algorithm>
#include <cmath>

#include "dlfusion/error.hpp"
#include "dlfusion/mp_select.hpp"
#include "dlfusion/opcount.hpp"

namespace dlfusion {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void require_lattice_mp(std::optional<int> mp, const CostModelConfig& cfg, int strategy) {
  if (!mp) {
    throw InvalidStrategyError("strategy " + std::to_string(strategy) +
                               " needs an explicit mp (--mp)");
  }
  if (!is_power_of_two(*mp) || *mp > cfg.num_cores) {
    throw InvalidMpError("mp must be a power of two in [1, " + std::to_string(cfg.num_cores) +
                         "], got " + std::to_string(*mp));
  }
}

Schedule per_layer(const NetworkIR& net, Strategy s, auto&& mp_of) {
  Schedule out{net.name, {}, std::string(strategy_label(s))};
  for (const auto& l : net.layers) {
    const int mp = mp_of(l);
    out.blocks.push_back(make_block(net, l.id, l.id, mp, mp));
  }
  return out;
}

}  // namespace

std::string_view strategy_label(Strategy s) {
  switch (s) {
    case Strategy::NoFusionMp1: return "no-fusion-mp1";
    case Strategy::NoFusionSharedMp: return "no-fusion-shared-mp";
    case Strategy::NoFusionPerLayerMp: return "no-fusion-per-layer-mp";
    case Strategy::FuseAllMaxMp: return "fuse-all-max-mp";
    case Strategy::FusionSharedMp: return "dlfusion-partition-shared-mp";
    case Strategy::DlFusion: return "dlfusion";
  }
  return "unknown";
}

int round_block_mp(double avg_mp, const CostModelConfig& cfg) {
  if (!(avg_mp >= 1.0)) return 1;
  const double lg = std::log2(avg_mp);
  const double e = cfg.round_mode == RoundMode::Floor ? std::floor(lg) : std::nearbyint(lg);
  const double max_exp = std::log2(static_cast<double>(cfg.num_cores));
  return 1 << static_cast<int>(std::clamp(e, 0.0, max_exp));
}

Schedule joint_opt(const NetworkIR& net, const CostModelConfig& cfg,
                   std::optional<double> threshold_gops) {
  const double threshold = threshold_gops.value_or(cfg.threshold_gops());
  if (!(threshold > 0.0)) throw DomainError("fusion threshold must be > 0 GOPs");
  if (compute_layers(net).empty()) {
    throw NoComputeLayerError("network '" + net.name + "' has no conv or fc layers");
  }

  Schedule out{net.name, {}, std::string(strategy_label(Strategy::DlFusion))};
  std::int64_t block_start = 0;
  std::uint64_t sum_op = 0;
  double vote_sum = 0.0;
  int vote_count = 0;

  auto close = [&](std::int64_t last) {
    const double avg = vote_sum / vote_count;
    out.blocks.push_back(make_block(net, block_start, last, round_block_mp(avg, cfg), avg));
    block_start = last + 1;
    sum_op = 0;
    vote_sum = 0.0;
    vote_count = 0;
  };

  const auto n = static_cast<std::int64_t>(net.layers.size());
  for (std::int64_t i = 0; i < n; ++i) {
    const Layer& l = net.layers[static_cast<std::size_t>(i)];
    if (l.is_compute()) {
      vote_sum += optimal_mp(l, cfg).mp;
      ++vote_count;
      sum_op += layer_ops(l).ops;
    }
    if (vote_count > 0) {
      const double per_core_gops = static_cast<double>(sum_op) / 1e9 / (vote_sum / vote_count);
      if (per_core_gops >= threshold) close(i);
    }
  }
  if (block_start < n) {
    if (vote_count > 0) {
      close(n - 1);
    } else {
      // Only attached layers remain: they ride along with the last block.
      auto& last = out.blocks.back();
      for (auto i = block_start; i < n; ++i) last.layer_ids.push_back(i);
    }
  }
  return out;
}

Schedule strategy_schedule(const NetworkIR& net, const CostModelConfig& cfg, int strategy,
                           std::optional<int> mp, std::optional<double> threshold_gops) {
  if (strategy < 1 || strategy > 6) {
    throw InvalidStrategyError("strategy must be 1..6, got " + std::to_string(strategy));
  }
  const auto s = static_cast<Strategy>(strategy);
  switch (s) {
    case Strategy::NoFusionMp1:
      return per_layer(net, s, [](const Layer&) { return 1; });
    case Strategy::NoFusionSharedMp:
      require_lattice_mp(mp, cfg, strategy);
      return per_layer(net, s, [&](const Layer&) { return *mp; });
    case Strategy::NoFusionPerLayerMp:
      return per_layer(net, s, [&](const Layer& l) {
        return l.is_compute() ? optimal_mp(l, cfg).mp : 1;
      });
    case Strategy::FuseAllMaxMp: {
      Schedule out{net.name, {}, std::string(strategy_label(s))};
      out.blocks.push_back(make_block(net, 0, static_cast<std::int64_t>(net.layers.size()) - 1,
                                      cfg.num_cores, cfg.num_cores));
      return out;
    }
    case Strategy::FusionSharedMp: {
      require_lattice_mp(mp, cfg, strategy);
      Schedule out = joint_opt(net, cfg, threshold_gops);
      out.strategy = std::string(strategy_label(s));
      for (auto& b : out.blocks) b.mp = *mp;
      return out;
    }
    case Strategy::DlFusion:
      return joint_opt(net, cfg, threshold_gops);
  }
  throw InvalidStrategyError("unreachable strategy");
}

}  // namespace dlfusion
