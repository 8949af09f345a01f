#include "dlfusion/mp_select.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "dlfusion/error.hpp"
#include "dlfusion/opcount.hpp"

namespace dlfusion {

namespace {

int log2_floor(std::int64_t v) {
  int e = 0;
  while (v > 1) {
    v >>= 1;
    ++e;
  }
  return e;
}

struct Sample {
  double x1;  // log2(c_out)
  double x2;  // log2(ops)
  double y;   // log2(best_mp)
};

struct Moments {
  double m1 = 0, m2 = 0, my = 0;
  double s11 = 0, s22 = 0, s12 = 0, s1y = 0, s2y = 0;
};

Moments moments(const std::vector<Sample>& xs) {
  Moments m;
  const double n = static_cast<double>(xs.size());
  for (const auto& s : xs) {
    m.m1 += s.x1;
    m.m2 += s.x2;
    m.my += s.y;
  }
  m.m1 /= n;
  m.m2 /= n;
  m.my /= n;
  for (const auto& s : xs) {
    const double d1 = s.x1 - m.m1, d2 = s.x2 - m.m2, dy = s.y - m.my;
    m.s11 += d1 * d1;
    m.s22 += d2 * d2;
    m.s12 += d1 * d2;
    m.s1y += d1 * dy;
    m.s2y += d2 * dy;
  }
  return m;
}

// Least-squares fit y ~ scale * (a * x1 + b * x2) + bias for fixed (a, b).
void fit_affine(const std::vector<Sample>& xs, double a, double b, Calibration& cal) {
  double mean_z = 0.0, mean_y = 0.0;
  for (const auto& s : xs) {
    mean_z += a * s.x1 + b * s.x2;
    mean_y += s.y;
  }
  mean_z /= static_cast<double>(xs.size());
  mean_y /= static_cast<double>(xs.size());
  double szz = 0.0, szy = 0.0;
  for (const auto& s : xs) {
    const double dz = a * s.x1 + b * s.x2 - mean_z;
    szz += dz * dz;
    szy += dz * (s.y - mean_y);
  }
  if (!(szz > 0.0)) throw DegenerateDataError("component score has no spread");
  cal.mp_map_scale = szy / szz;
  cal.mp_map_bias = mean_y - cal.mp_map_scale * mean_z;
}

double rms(const std::vector<Sample>& xs, const Calibration& c) {
  double acc = 0.0;
  for (const auto& s : xs) {
    const double pred = c.mp_map_scale * (c.alpha * s.x1 + c.beta * s.x2) + c.mp_map_bias;
    acc += (pred - s.y) * (pred - s.y);
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

}  // namespace

MpScore mp_score(const Layer& layer, const CostModelConfig& cfg) {
  if (!layer.is_compute()) {
    throw NotComputeLayerError("layer " + std::to_string(layer.id) + " (" +
                               std::string(to_string(layer.kind)) + ") has no MP vote");
  }
  const auto ops = layer_ops(layer).ops;
  if (ops == 0) throw DomainError("layer " + std::to_string(layer.id) + " has zero ops");
  const auto channels = layer.channels();
  if (channels < 1) throw DomainError("layer " + std::to_string(layer.id) + " has no channels");
  const double score = cfg.alpha * std::log2(static_cast<double>(channels)) +
                       cfg.beta * std::log2(static_cast<double>(ops));
  return {score, layer.id};
}

int channel_mp_cap(std::int64_t channels, const CostModelConfig& cfg) {
  const std::int64_t slices = std::max<std::int64_t>(1, channels / cfg.min_channel_partition);
  const int cap = 1 << std::min(log2_floor(slices), 30);
  return std::min(cap, cfg.num_cores);
}

MpChoice score_to_mp(const MpScore& score, const Layer& layer, const CostModelConfig& cfg) {
  const double raw = cfg.mp_map_scale * score.score + cfg.mp_map_bias;
  // nearbyint honours the default FE_TONEAREST mode: ties go to even.
  const double max_exp = std::log2(static_cast<double>(cfg.num_cores));
  const double e = std::clamp(std::nearbyint(raw), 0.0, max_exp);
  int mp = 1 << static_cast<int>(e);
  mp = std::min(mp, channel_mp_cap(layer.channels(), cfg));
  return {mp, score};
}

MpChoice optimal_mp(const Layer& layer, const CostModelConfig& cfg) {
  return score_to_mp(mp_score(layer, cfg), layer, cfg);
}

Calibration calibrate(std::vector<ProfileRecord> profiles, CalibrationMethod method,
                      double l1_norm) {
  if (profiles.size() < 3) {
    throw InsufficientDataError("calibration needs at least 3 profile records, got " +
                                std::to_string(profiles.size()));
  }
  std::sort(profiles.begin(), profiles.end(), [](const auto& a, const auto& b) {
    if (a.c_out != b.c_out) return a.c_out < b.c_out;
    if (a.op_gops != b.op_gops) return a.op_gops < b.op_gops;
    return a.best_mp < b.best_mp;
  });
  std::vector<Sample> xs;
  xs.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (p.c_out < 1 || !(p.op_gops > 0.0) || !(p.best_mp > 0.0)) {
      throw DomainError("profile records need c_out ≥ 1, op_gops > 0 and best_mp > 0");
    }
    xs.push_back({std::log2(static_cast<double>(p.c_out)), std::log2(p.op_gops * 1e9),
                  std::log2(p.best_mp)});
  }

  const Moments m = moments(xs);
  const double det = m.s11 * m.s22 - m.s12 * m.s12;
  if (!(m.s11 > 0.0) || !(m.s22 > 0.0) || det <= 1e-12 * m.s11 * m.s22) {
    throw DegenerateDataError("profile features are rank deficient (need spread in both "
                              "c_out and op count, not collinear)");
  }

  double a = 0.0, b = 0.0;
  if (method == CalibrationMethod::LeastSquares) {
    a = (m.s22 * m.s1y - m.s12 * m.s2y) / det;
    b = (m.s11 * m.s2y - m.s12 * m.s1y) / det;
  } else {
    // On standardized features the correlation matrix is [[1, r], [r, 1]];
    // its leading eigenvector is (1, sign(r)) / sqrt(2). Loadings are mapped
    // back to raw-feature weights by dividing by each feature's spread.
    const double sd1 = std::sqrt(m.s11), sd2 = std::sqrt(m.s22);
    const double r = m.s12 / (sd1 * sd2);
    if (std::abs(r) < 1e-12) {
      throw DegenerateDataError("uncorrelated features: leading principal component is not unique");
    }
    a = 1.0 / sd1;
    b = (r > 0 ? 1.0 : -1.0) / sd2;
    // Orient the component so it increases with best_mp.
    if (a * m.s1y + b * m.s2y < 0) {
      a = -a;
      b = -b;
    }
  }
  double norm = std::abs(a) + std::abs(b);
  if (!(norm > 0.0)) throw DegenerateDataError("best_mp does not vary with the features");
  // Slopes at roundoff level are exact zeros.
  if (std::abs(a) <= 1e-9 * norm) a = 0.0;
  if (std::abs(b) <= 1e-9 * norm) b = 0.0;
  norm = std::abs(a) + std::abs(b);

  Calibration cal;
  cal.alpha = l1_norm * a / norm;
  cal.beta = l1_norm * b / norm;
  fit_affine(xs, cal.alpha, cal.beta, cal);
  cal.rms_residual = rms(xs, cal);
  return cal;
}

CostModelConfig apply_calibration(const CostModelConfig& cfg, const Calibration& cal) {
  CostModelConfig out = cfg;
  out.alpha = cal.alpha;
  out.beta = cal.beta;
  out.mp_map_scale = cal.mp_map_scale;
  out.mp_map_bias = cal.mp_map_bias;
  return out;
}

std::vector<ProfileRecord> read_profiles_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("profile CSV is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "c_out,op_gops,best_mp") {
    throw SchemaError("profile CSV header must be 'c_out,op_gops,best_mp', got '" + line + "'");
  }
  std::vector<ProfileRecord> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string f1, f2, f3, extra;
    if (!std::getline(ss, f1, ',') || !std::getline(ss, f2, ',') || !std::getline(ss, f3, ',') ||
        std::getline(ss, extra, ',')) {
      throw SchemaError("profile CSV row " + std::to_string(row) + ": expected 3 fields");
    }
    try {
      std::size_t used = 0;
      ProfileRecord r;
      r.c_out = std::stoll(f1, &used);
      if (used != f1.size()) throw std::invalid_argument(f1);
      r.op_gops = std::stod(f2, &used);
      if (used != f2.size()) throw std::invalid_argument(f2);
      r.best_mp = std::stod(f3, &used);
      if (used != f3.size()) throw std::invalid_argument(f3);
      out.push_back(r);
    } catch (const std::logic_error&) {
      throw SchemaError("profile CSV row " + std::to_string(row) + ": malformed number");
    }
  }
  return out;
}

void write_profiles_csv(std::ostream& out, const std::vector<ProfileRecord>& profiles) {
  out << "c_out,op_gops,best_mp\n";
  char buf[128];
  for (const auto& p : profiles) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g\n", static_cast<long long>(p.c_out),
                  p.op_gops, p.best_mp);
    out << buf;
  }
}

}  // namespace dlfusion
