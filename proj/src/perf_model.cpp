#include "dlfusion/perf_model.hpp"

#include <algorithm>
#include <cmath>

#include "dlfusion/error.hpp"

namespace dlfusion {

namespace {

// Membership of each pixel index along one axis.
using AxisSet = std::vector<char>;

std::int64_t size_of(const AxisSet& set) {
  return std::count(set.begin(), set.end(), char{1});
}

// Output positions of a conv need input positions [i*s - p, i*s - p + k - 1].
AxisSet conv_inputs(const AxisSet& out, std::int64_t stride, std::int64_t k, std::int64_t pad,
                    std::int64_t in_extent) {
  AxisSet in(static_cast<std::size_t>(in_extent), 0);
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!out[i]) continue;
    const auto lo = std::max<std::int64_t>(static_cast<std::int64_t>(i) * stride - pad, 0);
    const auto hi = std::min<std::int64_t>(static_cast<std::int64_t>(i) * stride - pad + k - 1,
                                           in_extent - 1);
    for (auto j = lo; j <= hi; ++j) in[static_cast<std::size_t>(j)] = 1;
  }
  return in;
}

// Maps positions of a conv's (reconstructed) input onto the previous conv's
// output when the two sizes disagree. A downsampling gap is read as a pooling
// window (stride = floor(prev / in), window covering prev exactly); anything
// else as identity. The last input position claims the rest of the previous map.
AxisSet adapt_to_previous(const AxisSet& in, std::int64_t prev_extent) {
  const auto in_extent = static_cast<std::int64_t>(in.size());
  if (in_extent == prev_extent) return in;
  AxisSet prev(static_cast<std::size_t>(prev_extent), 0);
  auto mark = [&](std::int64_t lo, std::int64_t hi) {
    for (auto j = std::max<std::int64_t>(lo, 0); j <= std::min(hi, prev_extent - 1); ++j) {
      prev[static_cast<std::size_t>(j)] = 1;
    }
  };
  const bool pooled = prev_extent >= 2 * in_extent;
  const std::int64_t s = pooled ? prev_extent / in_extent : 1;
  const std::int64_t k = pooled ? prev_extent - (in_extent - 1) * s : 1;
  for (std::int64_t i = 0; i < in_extent; ++i) {
    if (!in[static_cast<std::size_t>(i)]) continue;
    if (pooled) {
      mark(i * s, i * s + k - 1);
    } else {
      mark(i, i == in_extent - 1 ? prev_extent - 1 : i);
    }
  }
  return prev;
}

struct Axis {
  std::int64_t out, in, k, stride, pad;
};

Axis rows_of(const ConvParams& p) { return {p.h_out, p.h_in(), p.k_h, p.stride, p.padding}; }
Axis cols_of(const ConvParams& p) { return {p.w_out, p.w_in(), p.k_w, p.stride, p.padding}; }

// Tile t of n over [0, extent): balanced contiguous split.
AxisSet tile_span(std::int64_t extent, int n, int t) {
  AxisSet set(static_cast<std::size_t>(extent), 0);
  for (auto i = extent * t / n; i < extent * (t + 1) / n; ++i) set[static_cast<std::size_t>(i)] = 1;
  return set;
}

}  // namespace

bool definitely_less(double a, double b) {
  return a < b - kTieTolerance * std::max(std::abs(a), std::abs(b));
}

TileGrid tile_grid(int mp, std::int64_t h, std::int64_t w) {
  if (mp < 1) throw InvalidMpError("mp must be ≥ 1, got " + std::to_string(mp));
  int small = 1;
  for (int d = 1; static_cast<long>(d) * d <= mp; ++d) {
    if (mp % d == 0) small = d;
  }
  const int large = mp / small;
  return h >= w ? TileGrid{large, small} : TileGrid{small, large};
}

HaloCounts halo_counts(std::span<const ConvParams> chain, int mp, HaloOptions opt) {
  const std::size_t n = chain.size();
  HaloCounts counts;
  counts.computed.assign(n, 0);
  counts.unfused.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    counts.unfused[j] = static_cast<std::uint64_t>(chain[j].h_out * chain[j].w_out);
  }
  if (n == 0) return counts;
  if (!opt.exact_stride) {
    for (std::size_t j = 1; j < n; ++j) {
      if (chain[j].stride > 1) {
        throw UnsupportedStrideError("layer " + std::to_string(j) +
                                     " of the fused chain has stride " +
                                     std::to_string(chain[j].stride));
      }
    }
  }
  if (mp == 1) {
    counts.computed = counts.unfused;
    return counts;
  }

  const ConvParams& last = chain[n - 1];
  const TileGrid grid = tile_grid(mp, last.h_out, last.w_out);
  for (int tr = 0; tr < grid.rows; ++tr) {
    for (int tc = 0; tc < grid.cols; ++tc) {
      AxisSet rows = tile_span(last.h_out, grid.rows, tr);
      AxisSet cols = tile_span(last.w_out, grid.cols, tc);
      if (size_of(rows) == 0 || size_of(cols) == 0) continue;  // more tiles than pixels
      counts.computed[n - 1] += static_cast<std::uint64_t>(size_of(rows) * size_of(cols));
      for (std::size_t j = n - 1; j-- > 0;) {
        const Axis nr = rows_of(chain[j + 1]);
        const Axis nc = cols_of(chain[j + 1]);
        rows = adapt_to_previous(conv_inputs(rows, nr.stride, nr.k, nr.pad, nr.in), chain[j].h_out);
        cols = adapt_to_previous(conv_inputs(cols, nc.stride, nc.k, nc.pad, nc.in), chain[j].w_out);
        counts.computed[j] += static_cast<std::uint64_t>(size_of(rows) * size_of(cols));
      }
    }
  }
  return counts;
}

RedundancyReport halo_redundancy(std::span<const Layer> block, int mp, HaloOptions opt) {
  RedundancyReport report;
  report.per_layer.reserve(block.size());
  for (const auto& l : block) report.per_layer.push_back({l.id, 1.0});

  std::uint64_t effective = 0;
  std::vector<std::size_t> run;
  auto flush = [&] {
    if (run.empty()) return;
    std::vector<ConvParams> chain;
    chain.reserve(run.size());
    for (auto i : run) chain.push_back(*block[i].conv);
    const HaloCounts counts = halo_counts(chain, mp, opt);
    for (std::size_t r = 0; r < run.size(); ++r) {
      const Layer& l = block[run[r]];
      const std::uint64_t charged = std::max(counts.computed[r], counts.unfused[r]);
      report.per_layer[run[r]].factor =
          static_cast<double>(charged) / static_cast<double>(counts.unfused[r]);
      effective += ops_per_output_pixel(l) * charged;
    }
    run.clear();
  };
  for (std::size_t i = 0; i < block.size(); ++i) {
    const Layer& l = block[i];
    if (l.conv) {
      run.push_back(i);
    } else if (l.fc) {
      flush();
      effective += layer_ops(l).ops;
    }
  }
  flush();
  report.effective_ops = {effective};
  return report;
}

double single_core_efficiency(double per_core_gops, const CostModelConfig& cfg) {
  if (per_core_gops <= 0.0) return 0.0;
  const double x = per_core_gops / cfg.opcount_critical_gops;
  if (x >= 1.0) return 1.0;
  return std::min(1.0, std::pow(x, cfg.gamma));
}

double channel_efficiency(std::int64_t channels, int mp, const CostModelConfig& cfg) {
  const double per_core = static_cast<double>(channels) / static_cast<double>(mp);
  return std::min(1.0, per_core / static_cast<double>(cfg.min_channel_partition));
}

std::uint64_t block_memory_bytes(std::span<const Layer> block, bool fused,
                                 const CostModelConfig& cfg) {
  const auto bpe = cfg.bytes_per_element;
  std::uint64_t total = 0;
  if (!fused) {
    for (const auto& l : block) total += tensor_bytes(l, bpe);
    return total;
  }
  const Layer* first = nullptr;
  const Layer* last = nullptr;
  for (const auto& l : block) {
    if (!l.is_compute()) continue;
    if (!first) first = &l;
    last = &l;
    total += weight_bytes(l, bpe);
  }
  if (!first) return 0;
  return total + input_bytes(*first, bpe) + output_bytes(*last, bpe);
}

CostBreakdown block_cost(std::span<const Layer> block, int mp, bool fused,
                         const CostModelConfig& cfg, HaloOptions opt) {
  if (mp < 1 || mp > cfg.num_cores) {
    throw InvalidMpError("mp " + std::to_string(mp) + " outside [1, " +
                         std::to_string(cfg.num_cores) + "]");
  }
  CostBreakdown cost;
  cost.mp = mp;

  std::uint64_t exact = 0;
  double channel_weighted = 0.0;
  for (const auto& l : block) {
    const auto ops = layer_ops(l).ops;
    exact += ops;
    if (ops > 0) channel_weighted += static_cast<double>(ops) * channel_efficiency(l.channels(), mp, cfg);
  }
  cost.exact_ops = {exact};

  if (fused && mp > 1) {
    cost.redundancy = halo_redundancy(block, mp, opt);
  } else {
    for (const auto& l : block) cost.redundancy.per_layer.push_back({l.id, 1.0});
    cost.redundancy.effective_ops = cost.exact_ops;
  }

  cost.memory_ms = static_cast<double>(block_memory_bytes(block, fused, cfg)) /
                   (cfg.bandwidth_gbs * 1e9) * 1000.0;

  const double effective_gops = cost.redundancy.effective_ops.gops();
  if (effective_gops > 0.0) {
    cost.per_core_gops = effective_gops / mp;
    const double channel_mean = channel_weighted / static_cast<double>(exact);
    cost.efficiency = single_core_efficiency(cost.per_core_gops, cfg) * channel_mean;
    cost.compute_ms =
        effective_gops / (mp * cfg.peak_gflops_per_core * cost.efficiency) * 1000.0;
  }
  cost.latency_ms = std::max(cost.compute_ms, cost.memory_ms);
  return cost;
}

std::span<const Layer> layer_range(const NetworkIR& net, std::int64_t first, std::int64_t last) {
  return std::span<const Layer>(net.layers).subspan(static_cast<std::size_t>(first),
                                                    static_cast<std::size_t>(last - first + 1));
}

Prediction predict_schedule(const NetworkIR& net, const Schedule& schedule,
                            const CostModelConfig& cfg) {
  check_coverage(net, schedule);
  Prediction p;
  p.blocks.reserve(schedule.blocks.size());
  for (const auto& b : schedule.blocks) {
    auto span = layer_range(net, b.layer_ids.front(), b.layer_ids.back());
    p.blocks.push_back(block_cost(span, b.mp, b.fused(), cfg));
    p.total_ms += p.blocks.back().latency_ms;
  }
  p.fps = p.total_ms > 0.0 ? 1000.0 / p.total_ms : 0.0;
  return p;
}

std::vector<int> power_of_two_mps(const CostModelConfig& cfg) {
  std::vector<int> out;
  for (int mp = 1; mp <= cfg.num_cores; mp *= 2) out.push_back(mp);
  return out;
}

int best_mp(std::span<const Layer> block, bool fused, const CostModelConfig& cfg,
            std::span<const int> candidates) {
  std::vector<int> sorted(candidates.begin(), candidates.end());
  std::sort(sorted.begin(), sorted.end());
  int best = 0;
  double best_latency = 0.0;
  for (int mp : sorted) {
    const double latency = block_cost(block, mp, fused, cfg).latency_ms;
    if (best == 0 || definitely_less(latency, best_latency)) {
      best = mp;
      best_latency = latency;
    }
  }
  if (best == 0) throw InvalidMpError("no candidate MP values");
  return best;
}

}  // namespace dlfusion
