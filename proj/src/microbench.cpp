#include "dlfusion/microbench.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>

#include "dlfusion/error.hpp"
#include "dlfusion/opcount.hpp"
#include "dlfusion/perf_model.hpp"

namespace dlfusion {

namespace {

template <typename T>
std::vector<T> positive(const std::vector<T>& values) {
  std::vector<T> out;
  std::copy_if(values.begin(), values.end(), std::back_inserter(out), [](T v) { return v > 0; });
  return out;
}

Layer as_layer(const ConvParams& p) { return conv_layer(0, p); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::istringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) fields.push_back(f);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

}  // namespace

std::uint64_t sweep_size(const SweepSpec& spec) {
  return static_cast<std::uint64_t>(spec.channel_range.size()) * spec.spatial_range.size() *
         spec.kernel_range.size();
}

std::vector<ConvParams> generate_sweep(const SweepSpec& spec) {
  std::vector<ConvParams> out;
  for (auto c : positive(spec.channel_range)) {
    for (auto hw : positive(spec.spatial_range)) {
      for (auto k : positive(spec.kernel_range)) out.push_back(make_conv(c, c, hw, k));
    }
  }
  if (out.empty()) throw ValidationError("sweep is empty after dropping non-positive values");
  return out;
}

std::vector<ProfileRecord> synthesize_profiles(const std::vector<ConvParams>& layers,
                                               const CostModelConfig& cfg, unsigned threads) {
  const auto mps = power_of_two_mps(cfg);
  std::vector<ProfileRecord> out(layers.size());
  auto work = [&](std::size_t worker, std::size_t workers) {
    for (std::size_t i = worker; i < layers.size(); i += workers) {
      const Layer l = as_layer(layers[i]);
      const int mp = best_mp(std::span<const Layer>(&l, 1), false, cfg, mps);
      out[i] = {layers[i].c_out, layer_ops(l).gops(), static_cast<double>(mp)};
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (threads == 1 || layers.size() < 2) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  std::sort(out.begin(), out.end(), [](const ProfileRecord& a, const ProfileRecord& b) {
    return std::tie(a.c_out, a.op_gops, a.best_mp) < std::tie(b.c_out, b.op_gops, b.best_mp);
  });
  return out;
}

std::vector<CurvePoint> sweep_curves(const std::vector<ConvParams>& layers,
                                     const std::vector<int>& mp_values,
                                     const CostModelConfig& cfg) {
  std::vector<CurvePoint> out;
  out.reserve(layers.size() * mp_values.size());
  for (const auto& p : layers) {
    const Layer l = as_layer(p);
    const double gops = layer_ops(l).gops();
    for (int mp : mp_values) {
      const auto cost = block_cost(std::span<const Layer>(&l, 1), mp, false, cfg);
      const double gflops = cost.latency_ms > 0.0 ? gops / (cost.latency_ms / 1000.0) : 0.0;
      out.push_back({p.c_out, p.h_out, p.k_h, mp, gflops});
    }
  }
  return out;
}

void write_curves_csv(std::ostream& out, const std::vector<CurvePoint>& points) {
  out << "c_out,h_out,k,mp,gflops\n";
  char buf[160];
  for (const auto& p : points) {
    std::snprintf(buf, sizeof buf, "%lld,%lld,%lld,%d,%.17g\n", static_cast<long long>(p.c_out),
                  static_cast<long long>(p.h_out), static_cast<long long>(p.k), p.mp, p.gflops);
    out << buf;
  }
}

std::vector<CurvePoint> read_curves_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("curve CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "c_out,h_out,k,mp,gflops") {
    throw SchemaError("curve CSV header must be 'c_out,h_out,k,mp,gflops', got '" + line + "'");
  }
  std::vector<CurvePoint> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 5) throw SchemaError("curve CSV row " + std::to_string(row) + ": expected 5 fields");
    try {
      std::size_t used = 0;
      auto whole = [&](const std::string& s) {
        const auto v = std::stoll(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
      };
      CurvePoint p;
      p.c_out = whole(f[0]);
      p.h_out = whole(f[1]);
      p.k = whole(f[2]);
      p.mp = static_cast<int>(whole(f[3]));
      p.gflops = std::stod(f[4], &used);
      if (used != f[4].size()) throw std::invalid_argument(f[4]);
      out.push_back(p);
    } catch (const std::logic_error&) {
      throw SchemaError("curve CSV row " + std::to_string(row) + ": malformed number");
    }
  }
  return out;
}

}  // namespace dlfusion
