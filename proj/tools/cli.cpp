#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlfusion/codegen.hpp"
#include "dlfusion/cost_config.hpp"
#include "dlfusion/error.hpp"
#include "dlfusion/fusion_opt.hpp"
#include "dlfusion/microbench.hpp"
#include "dlfusion/model_ir.hpp"
#include "dlfusion/mp_select.hpp"
#include "dlfusion/opcount.hpp"
#include "dlfusion/oracle_search.hpp"
#include "dlfusion/perf_model.hpp"
#include "dlfusion/schedule.hpp"

#ifndef DLFUSION_VERSION
#define DLFUSION_VERSION "0.0.0"
#endif

namespace dlfusion::cli {

namespace {

struct GlobalOptions {
  std::string config;
  bool csv = false;
  std::uint64_t seed = 0;
  int verbosity = 0;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string ms(double v) { return fmt("%.6f", v); }

// Same cell strings for both renderings, so --csv and the table agree.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void print(std::ostream& out, bool csv) const {
    if (csv) {
      auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << "\n";
      };
      line(header);
      for (const auto& r : rows) line(r);
      return;
    }
    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    auto line = [&](const std::vector<std::string>& cells) {
      std::string text;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text += "  ";
        const auto pad = std::string(width[i] - cells[i].size(), ' ');
        text += i == 0 ? cells[i] + pad : pad + cells[i];
      }
      while (!text.empty() && text.back() == ' ') text.pop_back();
      out << text << "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
  }
};

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputFileError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw IoError("cannot write '" + path + "'");
}

CostModelConfig base_config(const GlobalOptions& g) {
  return g.config.empty() ? CostModelConfig{} : load_config(g.config);
}

void check_config(const CostModelConfig& cfg) {
  auto violations = validate_config(cfg);
  if (!violations.empty()) throw ValidationError("invalid cost model config: " + violations.front());
}

std::string mp_summary(const Schedule& s) {
  std::set<int> mps;
  for (const auto& b : s.blocks) mps.insert(b.mp);
  return mps.size() == 1 ? std::to_string(*mps.begin()) : "mixed";
}

std::string layer_span(const FusionBlock& b) {
  const auto first = std::to_string(b.layer_ids.front());
  return b.layer_ids.size() == 1 ? first : first + "-" + std::to_string(b.layer_ids.back());
}

// Best power-of-two shared mp for strategies 2 and 5; ties go to the smaller mp.
Schedule best_shared(const NetworkIR& net, const CostModelConfig& cfg, int strategy,
                     std::optional<double> threshold) {
  std::optional<Schedule> best;
  double best_ms = 0.0;
  for (int mp : power_of_two_mps(cfg)) {
    auto s = strategy_schedule(net, cfg, strategy, mp, threshold);
    const double t = predict_schedule(net, s, cfg).total_ms;
    if (!best || definitely_less(t, best_ms)) {
      best = std::move(s);
      best_ms = t;
    }
  }
  return *best;
}

// ---- commands ---------------------------------------------------------------

void cmd_opcount(const GlobalOptions& g, const std::string& path, std::ostream& out) {
  const auto net = load_network(path);
  const auto cfg = base_config(g);
  Table t{{"id", "type", "ops", "gops", "intensity"}, {}};
  std::uint64_t total = 0;
  for (const auto& l : net.layers) {
    const auto ops = layer_ops(l);
    total += ops.ops;
    t.rows.push_back({std::to_string(l.id), std::string(to_string(l.kind)), std::to_string(ops.ops),
                      fmt("%.6f", ops.gops()),
                      l.is_compute() ? fmt("%.4f", intensity(l, cfg.bytes_per_element).value)
                                     : std::string("-")});
  }
  t.rows.push_back({"total", "", std::to_string(total), fmt("%.6f", OpCount{total}.gops()), "-"});
  t.print(out, g.csv);
}

void cmd_space(const GlobalOptions& g, int layers, std::ostream& out) {
  const auto exact = search_space(layers);
  const auto sci = scientific(exact);
  if (g.csv) {
    out << "layers,exact,scientific\n" << layers << "," << exact.str() << "," << sci << "\n";
  } else {
    out << "layers: " << layers << "\nexact: " << exact.str() << "\n≈" << sci << "\n";
  }
}

void cmd_optimize(const GlobalOptions& g, const std::string& path, int strategy,
                  std::optional<int> mp, std::optional<double> threshold,
                  const std::string& output, std::ostream& out) {
  const auto net = load_network(path);
  auto cfg = base_config(g);
  if (threshold) cfg.fusion_threshold_gops = threshold;
  check_config(cfg);
  const auto schedule = strategy_schedule(net, cfg, strategy, mp);
  const auto text = schedule_to_json(schedule);
  if (output.empty()) {
    out << text;
    return;
  }
  write_text(output, text);
  const auto p = predict_schedule(net, schedule, cfg);
  out << "strategy " << strategy << " (" << schedule.strategy << "): " << schedule.blocks.size()
      << " blocks, predicted " << ms(p.total_ms) << " ms, " << fmt("%.3f", p.fps)
      << " fps -> " << output << "\n";
}

void cmd_simulate(const GlobalOptions& g, const std::string& path, const std::string& sched_path,
                  std::ostream& out) {
  const auto net = load_network(path);
  const auto cfg = base_config(g);
  const auto schedule = schedule_from_json(read_text(sched_path), net);
  const auto p = predict_schedule(net, schedule, cfg);
  Table t{{"block", "layers", "mp", "fused", "gops", "redundancy", "efficiency", "compute_ms",
           "memory_ms", "latency_ms"},
          {}};
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    const auto& b = schedule.blocks[i];
    const auto& c = p.blocks[i];
    const double redundancy =
        c.exact_ops.ops ? static_cast<double>(c.redundancy.effective_ops.ops) / c.exact_ops.ops : 1.0;
    t.rows.push_back({std::to_string(i), layer_span(b), std::to_string(b.mp),
                      b.fused() ? "yes" : "no", fmt("%.6f", c.exact_ops.gops()),
                      fmt("%.6f", redundancy), fmt("%.6f", c.efficiency), ms(c.compute_ms),
                      ms(c.memory_ms), ms(c.latency_ms)});
  }
  t.rows.push_back({"total", "", "", "", "", "", "", "", "", ms(p.total_ms)});
  t.print(out, g.csv);
  if (!g.csv) out << "fps: " << fmt("%.3f", p.fps) << "\n";
}

SearchSpaceSpec search_spec(const std::vector<int>& mp_choices, int multiple,
                            std::uint64_t max_candidates) {
  SearchSpaceSpec spec;
  if (!mp_choices.empty()) spec.mp_choices = mp_choices;
  spec.block_size_multiple = multiple;
  spec.max_candidates = max_candidates;
  return spec;
}

void cmd_oracle(const GlobalOptions& g, const std::string& path, const SearchSpaceSpec& spec,
                unsigned threads, const std::string& output, std::ostream& out,
                std::ostream& err) {
  const auto net = load_network(path);
  const auto cfg = base_config(g);
  const auto result = brute_force(net, cfg, spec, threads);
  const double s6 = predict_schedule(net, joint_opt(net, cfg), cfg).total_ms;
  const double gap = (s6 - result.best_latency_ms) / result.best_latency_ms * 100.0;
  if (!output.empty()) write_text(output, schedule_to_json(result.best));
  if (g.csv) {
    out << "candidates,best_latency_ms,blocks,strategy6_latency_ms,gap_pct\n"
        << result.candidates_evaluated << "," << ms(result.best_latency_ms) << ","
        << result.best.blocks.size() << "," << ms(s6) << "," << fmt("%.3f", gap) << "\n";
  } else {
    out << "candidates: " << result.candidates_evaluated
        << ", best latency: " << ms(result.best_latency_ms) << " ms"
        << ", gap vs strategy 6: " << fmt("%.3f", gap) << "%\n";
    if (output.empty()) out << schedule_to_json(result.best);
  }
  if (g.verbosity > 0) err << "oracle wall time: " << fmt("%.3f", result.wall_time_s) << " s\n";
}

void cmd_compare(const GlobalOptions& g, const std::string& path, const SearchSpaceSpec& spec,
                 unsigned threads, bool skip_oracle, std::ostream& out, std::ostream& err) {
  const auto net = load_network(path);
  const auto cfg = base_config(g);
  std::vector<std::pair<std::string, Schedule>> rows;
  for (int s = 1; s <= 6; ++s) {
    const bool shared = s == 2 || s == 5;
    rows.emplace_back(std::to_string(s), shared ? best_shared(net, cfg, s, std::nullopt)
                                                : strategy_schedule(net, cfg, s));
  }
  const double base_ms = predict_schedule(net, rows.front().second, cfg).total_ms;
  Table t{{"strategy", "label", "blocks", "mp", "latency_ms", "fps", "speedup"}, {}};
  for (const auto& [id, s] : rows) {
    const auto p = predict_schedule(net, s, cfg);
    t.rows.push_back({id, s.strategy, std::to_string(s.blocks.size()), mp_summary(s),
                      ms(p.total_ms), fmt("%.3f", p.fps), fmt("%.3f", base_ms / p.total_ms)});
  }
  if (skip_oracle) {
    t.rows.push_back({"7", "oracle", "", "", "", "", ""});
  } else {
    try {
      const auto r = brute_force(net, cfg, spec, threads);
      t.rows.push_back({"7", "oracle", std::to_string(r.best.blocks.size()), mp_summary(r.best),
                        ms(r.best_latency_ms), fmt("%.3f", 1000.0 / r.best_latency_ms),
                        fmt("%.3f", base_ms / r.best_latency_ms)});
    } catch (const SpaceTooLargeError& e) {
      err << "oracle skipped: " << e.what() << "\n";
      t.rows.push_back({"7", "oracle", "", "", "", "", ""});
    }
  }
  t.print(out, g.csv);
}

void cmd_calibrate(const GlobalOptions& g, const std::string& profiles_path,
                   const std::string& method, const std::string& write_config,
                   std::ostream& out) {
  std::istringstream in(read_text(profiles_path));
  const auto profiles = read_profiles_csv(in);
  auto base = base_config(g);
  const auto cal = calibrate(profiles,
                             method == "pca" ? CalibrationMethod::Pca : CalibrationMethod::LeastSquares,
                             base.calibration_l1);
  Table t{{"alpha", "beta", "mp_map_scale", "mp_map_bias", "rms_residual"},
          {{fmt("%.9f", cal.alpha), fmt("%.9f", cal.beta), fmt("%.9f", cal.mp_map_scale),
            fmt("%.9f", cal.mp_map_bias), fmt("%.9f", cal.rms_residual)}}};
  t.print(out, g.csv);
  if (!write_config.empty()) {
    std::ifstream existing(write_config);
    if (existing) base = load_config(write_config, base);
    write_text(write_config, config_to_json(apply_calibration(base, cal)).dump(2) + "\n");
  }
}

struct MicrobenchArgs {
  std::vector<std::int64_t> channels;
  std::vector<std::int64_t> spatial;
  std::vector<std::int64_t> kernels;
  std::vector<int> mp_values;
  std::size_t sample = 0;
  std::string out;
  std::string curves;
  unsigned threads = 0;
};

void cmd_microbench(const GlobalOptions& g, const MicrobenchArgs& a, std::ostream& out,
                    std::ostream& err) {
  const auto cfg = base_config(g);
  SweepSpec spec{a.channels, a.spatial, a.kernels, a.mp_values};
  if (spec.mp_values.empty()) spec.mp_values = power_of_two_mps(cfg);
  for (int mp : spec.mp_values) {
    if (mp < 1 || mp > cfg.num_cores) {
      throw InvalidMpError("mp value " + std::to_string(mp) + " outside [1, " +
                           std::to_string(cfg.num_cores) + "]");
    }
  }
  if (g.verbosity > 0) err << "sweep size: " << sweep_size(spec) << "\n";
  auto layers = generate_sweep(spec);
  if (a.sample > 0 && a.sample < layers.size()) {
    std::mt19937_64 rng(g.seed);
    std::vector<ConvParams> picked;
    std::sample(layers.begin(), layers.end(), std::back_inserter(picked), a.sample, rng);
    layers = std::move(picked);
  }
  const auto profiles = synthesize_profiles(layers, cfg, a.threads);
  std::ostringstream csv;
  write_profiles_csv(csv, profiles);
  if (a.out.empty()) {
    out << csv.str();
  } else {
    write_text(a.out, csv.str());
    out << "wrote " << profiles.size() << " profiles to " << a.out << "\n";
  }
  if (!a.curves.empty()) {
    std::ostringstream curves;
    write_curves_csv(curves, sweep_curves(layers, spec.mp_values, cfg));
    write_text(a.curves, curves.str());
    if (!a.out.empty()) out << "wrote curves to " << a.curves << "\n";
  }
}

void cmd_gen_code(const GlobalOptions& g, const std::string& path, const std::string& sched_path,
                  const std::string& out_dir, bool force, std::ostream& out) {
  const auto net = load_network(path);
  const auto cfg = base_config(g);
  const auto schedule = schedule_from_json(read_text(sched_path), net);
  const auto project = render(net, schedule, cfg);
  emit(project, out_dir, force);
  for (const auto& [rel, text] : project.source_files) {
    out << (std::filesystem::path(out_dir) / rel).string() << "\n";
  }
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layer fusion and model-parallelism optimizer for multi-core accelerators",
               "dlfusion"};
  app.set_version_flag("--version", std::string("dlfusion ") + DLFUSION_VERSION);
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config, "Cost model config (JSON)");
  app.add_flag("--csv", g.csv, "Emit CSV instead of a table");
  app.add_option("--seed", g.seed, "Seed for randomized sampling");
  app.add_flag("-v,--verbose", g.verbosity, "Verbose diagnostics on stderr");

  std::string net_path;
  std::string sched_path;
  std::string output;

  auto* opcount = app.add_subcommand("opcount", "Per-layer op counts and intensity");
  opcount->add_option("network", net_path, "Network JSON")->required();

  int space_layers = 0;
  auto* space = app.add_subcommand("space", "Size of the joint fusion/MP search space");
  space->add_option("--layers", space_layers, "Number of layers")->required();

  int strategy = 6;
  std::optional<int> mp;
  std::optional<double> threshold;
  auto* optimize = app.add_subcommand("optimize", "Produce a schedule with strategy 1-6");
  optimize->add_option("network", net_path, "Network JSON")->required();
  optimize->add_option("--strategy", strategy, "Strategy 1..6")->capture_default_str();
  optimize->add_option("--mp", mp, "Shared MP for strategies 2 and 5");
  optimize->add_option("--threshold-gops", threshold, "Fusion threshold in GOPs per core");
  optimize->add_option("-o,--output", output, "Schedule file (stdout when omitted)");

  std::vector<int> mp_choices;
  int block_multiple = 4;
  std::uint64_t max_candidates = SearchSpaceSpec{}.max_candidates;
  unsigned threads = 0;
  auto* oracle = app.add_subcommand("oracle", "Reduced brute-force search");
  oracle->add_option("network", net_path, "Network JSON")->required();
  oracle->add_option("--mp-choices", mp_choices, "MP values to try")->delimiter(',');
  oracle->add_option("--block-multiple", block_multiple, "Non-final block size multiple")
      ->capture_default_str();
  oracle->add_option("--max-candidates", max_candidates, "Refuse larger spaces")
      ->capture_default_str();
  oracle->add_option("--threads", threads, "Worker threads (0 = all cores)");
  oracle->add_option("-o,--output", output, "Schedule file");

  bool no_oracle = false;
  auto* compare = app.add_subcommand("compare", "Strategies 1-6 and the oracle side by side");
  compare->add_option("network", net_path, "Network JSON")->required();
  compare->add_option("--mp-choices", mp_choices, "Oracle MP values")->delimiter(',');
  compare->add_option("--block-multiple", block_multiple, "Oracle block size multiple");
  compare->add_option("--max-candidates", max_candidates, "Oracle candidate cap");
  compare->add_option("--threads", threads, "Worker threads (0 = all cores)");
  compare->add_flag("--no-oracle", no_oracle, "Leave the oracle row empty");

  auto* simulate = app.add_subcommand("simulate", "Predict the latency of a schedule");
  simulate->add_option("network", net_path, "Network JSON")->required();
  simulate->add_option("--schedule", sched_path, "Schedule JSON")->required();

  std::string profiles_path;
  std::string method = "ls";
  std::string write_config;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Fit MP selector weights to profiles");
  calibrate_cmd->add_option("--profiles", profiles_path, "Profile CSV")->required();
  calibrate_cmd->add_option("--method", method, "ls or pca")
      ->check(CLI::IsMember({"ls", "pca"}))
      ->capture_default_str();
  calibrate_cmd->add_option("--write-config", write_config, "Merge results into this config");

  MicrobenchArgs mb;
  auto* microbench = app.add_subcommand("microbench", "Synthesize profiles from a conv sweep");
  microbench->add_option("--channels", mb.channels, "Channel counts")->delimiter(',')->required();
  microbench->add_option("--spatial", mb.spatial, "Output sizes")->delimiter(',')->required();
  microbench->add_option("--kernels", mb.kernels, "Kernel sizes")->delimiter(',')->required();
  microbench->add_option("--mp-values", mb.mp_values, "MP values for --curves")->delimiter(',');
  microbench->add_option("--sample", mb.sample, "Random subset of N layers (uses --seed)");
  microbench->add_option("--out", mb.out, "Profile CSV (stdout when omitted)");
  microbench->add_option("--curves", mb.curves, "Curve CSV");
  microbench->add_option("--threads", mb.threads, "Worker threads (0 = all cores)");

  bool force = false;
  auto* gen_code = app.add_subcommand("gen-code", "Emit C++ for the sdk stub");
  gen_code->add_option("network", net_path, "Network JSON")->required();
  gen_code->add_option("--schedule", sched_path, "Schedule JSON")->required();
  gen_code->add_option("-o,--output", output, "Output directory")->required();
  gen_code->add_flag("--force", force, "Overwrite a non-empty directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (opcount->parsed()) {
      cmd_opcount(g, net_path, out);
    } else if (space->parsed()) {
      cmd_space(g, space_layers, out);
    } else if (optimize->parsed()) {
      cmd_optimize(g, net_path, strategy, mp, threshold, output, out);
    } else if (oracle->parsed()) {
      cmd_oracle(g, net_path, search_spec(mp_choices, block_multiple, max_candidates), threads,
                 output, out, err);
    } else if (compare->parsed()) {
      cmd_compare(g, net_path, search_spec(mp_choices, block_multiple, max_candidates), threads,
                  no_oracle, out, err);
    } else if (simulate->parsed()) {
      cmd_simulate(g, net_path, sched_path, out);
    } else if (calibrate_cmd->parsed()) {
      cmd_calibrate(g, profiles_path, method, write_config, out);
    } else if (microbench->parsed()) {
      cmd_microbench(g, mb, out, err);
    } else if (gen_code->parsed()) {
      cmd_gen_code(g, net_path, sched_path, output, force, out);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.error_class() == ErrorClass::Input ? 2 : 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace dlfusion::cli
