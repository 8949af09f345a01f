#include "dlfusion/codegen.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "dlfusion/error.hpp"
#include "dlfusion/opcount.hpp"

namespace dlfusion {

namespace {

constexpr std::string_view kMainTemplate = R"tmpl(// Generated by dlfusion (template v{{template_version}}).
// network: {{network}}
// strategy: {{strategy}}
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <sdk_stub.h>

#include "dlfusion_config.h"

#define CHECK(call)                                                  \
  do {                                                               \
    sdk_status status_ = (call);                                     \
    if (status_ != SDK_OK) {                                         \
      std::fprintf(stderr, "%s failed: %d\n", #call, (int)status_);  \
      std::exit(1);                                                  \
    }                                                                \
  } while (0)

int main() {
  sdk_session_t session = nullptr;
  CHECK(sdk_session_create(&session, &dlfusion_device_config));
{{#blocks}}
  // block {{index}}: layers {{layers}} mp {{mp}}
  {
    sdk_fusion_t fusion = nullptr;
    CHECK(sdk_fusion_create(&fusion));
{{ops}}    CHECK(sdk_fusion_set_model_parallelism(fusion, {{mp}}));
    CHECK(sdk_fusion_compile(fusion));
    CHECK(sdk_session_add(session, fusion));
  }
{{/blocks}}
  std::vector<unsigned char> input(DLFUSION_INPUT_BYTES);
  sdk_report report{};
  CHECK(sdk_session_forward(session, input.data(), input.size(), &report));
  for (int i = 0; i < report.num_blocks; ++i) {
    std::printf("block %d: %.17g ms\n", i, report.block_latency_ms[i]);
  }
  std::printf("total: %.17g ms\n", report.total_ms);
  std::printf("fps: %.17g\n", report.total_ms > 0.0 ? 1000.0 / report.total_ms : 0.0);
  sdk_session_destroy(session);
  return 0;
}
)tmpl";

constexpr std::string_view kBuildScript = R"tmpl(#!/bin/sh
# Builds the generated session against the sdk stub.
#   SDK_STUB_INCLUDE  directory containing sdk_stub.h
#   SDK_STUB_LIB      directory containing libsdk_stub.a
set -eu
: "${CXX:=c++}"
: "${SDK_STUB_INCLUDE:?set SDK_STUB_INCLUDE}"
: "${SDK_STUB_LIB:?set SDK_STUB_LIB}"
cd "$(dirname "$0")"
"$CXX" -std=c++17 -O2 -I"$SDK_STUB_INCLUDE" -I. main.cpp -L"$SDK_STUB_LIB" -lsdk_stub -o {{binary}}
)tmpl";

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Keeps a name safe inside a line comment.
std::string comment_safe(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

std::string identifier(std::string_view s) {
  std::string out;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
    out += ok ? c : '_';
  }
  return out.empty() ? "session" : out;
}

std::string_view activation_enum(LayerKind kind) {
  switch (kind) {
    case LayerKind::ReLU: return "SDK_ACT_RELU";
    case LayerKind::BatchNorm: return "SDK_ACT_BATCHNORM";
    case LayerKind::Pool: return "SDK_ACT_POOL";
    case LayerKind::Add: return "SDK_ACT_ADD";
    default: return "";
  }
}

std::string op_lines(const Layer& l) {
  std::ostringstream out;
  out << "    // layer " << l.id << ": " << to_string(l.kind) << "\n    {\n      sdk_op_t op = nullptr;\n";
  if (l.conv) {
    const auto& p = *l.conv;
    out << "      const sdk_conv_params params = {" << p.c_in << ", " << p.c_out << ", " << p.h_out
        << ", " << p.w_out << ", " << p.k_h << ", " << p.k_w << ", " << p.stride << ", "
        << p.padding << "};\n      CHECK(sdk_create_conv_op(&op, &params));\n";
  } else if (l.fc) {
    out << "      const sdk_fc_params params = {" << l.fc->m << ", " << l.fc->k << ", " << l.fc->n
        << "};\n      CHECK(sdk_create_fc_op(&op, &params));\n";
  } else {
    out << "      CHECK(sdk_create_activation_op(&op, " << activation_enum(l.kind) << "));\n";
  }
  out << "      CHECK(sdk_fusion_add_op(fusion, op));\n    }\n";
  return out.str();
}

std::string config_header(const NetworkIR& net, const CostModelConfig& cfg) {
  std::uint64_t input = 0;
  for (const auto& l : net.layers) {
    if (l.is_compute()) {
      input = input_bytes(l, cfg.bytes_per_element);
      break;
    }
  }
  std::ostringstream out;
  out << "// Generated by dlfusion (template v" << kTemplateVersion << ").\n"
      << "#ifndef DLFUSION_CONFIG_H\n#define DLFUSION_CONFIG_H\n\n"
      << "#include <sdk_stub.h>\n\n"
      << "#define DLFUSION_INPUT_BYTES " << input << "u\n\n"
      << "static const sdk_device_config dlfusion_device_config = {\n"
      << "    " << cfg.num_cores << ",  // num_cores\n"
      << "    " << fmt_double(cfg.peak_gflops_per_core) << ",  // peak_gflops_per_core\n"
      << "    " << fmt_double(cfg.bandwidth_gbs) << ",  // bandwidth_gbs\n"
      << "    " << cfg.bytes_per_element << ",  // bytes_per_element\n"
      << "    " << fmt_double(cfg.opcount_critical_gops) << ",  // opcount_critical_gops\n"
      << "    " << fmt_double(cfg.gamma) << ",  // gamma\n"
      << "    " << cfg.min_channel_partition << ",  // min_channel_partition\n"
      << "};\n\n#endif\n";
  return out.str();
}

}  // namespace

std::string expand_template(std::string_view text, const TemplateValues& globals,
                            const std::vector<TemplateValues>& blocks) {
  constexpr std::string_view kOpen = "{{#blocks}}";
  constexpr std::string_view kClose = "{{/blocks}}";

  auto substitute = [](std::string_view part, const TemplateValues* local,
                       const TemplateValues& global) {
    std::string out;
    std::size_t pos = 0;
    while (true) {
      const auto open = part.find("{{", pos);
      if (open == std::string_view::npos) {
        out.append(part.substr(pos));
        return out;
      }
      const auto close = part.find("}}", open + 2);
      if (close == std::string_view::npos) throw TemplateError("unterminated '{{' in template");
      out.append(part.substr(pos, open - pos));
      const auto name = part.substr(open + 2, close - open - 2);
      if (!name.empty() && (name.front() == '#' || name.front() == '/')) {
        throw TemplateError("unexpected section marker '{{" + std::string(name) + "}}'");
      }
      if (local) {
        if (auto it = local->find(name); it != local->end()) {
          out += it->second;
          pos = close + 2;
          continue;
        }
      }
      auto it = global.find(name);
      if (it == global.end()) {
        throw TemplateError("no value for placeholder '{{" + std::string(name) + "}}'");
      }
      out += it->second;
      pos = close + 2;
    }
  };

  const auto open = text.find(kOpen);
  const auto close = text.find(kClose);
  if (open == std::string_view::npos && close == std::string_view::npos) {
    return substitute(text, nullptr, globals);
  }
  if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
    throw TemplateError("unbalanced {{#blocks}} section");
  }
  if (text.find(kOpen, open + 1) != std::string_view::npos ||
      text.find(kClose, close + 1) != std::string_view::npos) {
    throw TemplateError("only one {{#blocks}} section is supported");
  }

  // A section marker alone on its line takes its newline with it.
  auto body_begin = open + kOpen.size();
  if (body_begin < text.size() && text[body_begin] == '\n') ++body_begin;
  auto tail_begin = close + kClose.size();
  if (tail_begin < text.size() && text[tail_begin] == '\n') ++tail_begin;

  std::string out = substitute(text.substr(0, open), nullptr, globals);
  const auto body = text.substr(body_begin, close - body_begin);
  for (const auto& b : blocks) out += substitute(body, &b, globals);
  out += substitute(text.substr(tail_begin), nullptr, globals);
  return out;
}

std::string_view default_main_template() { return kMainTemplate; }

GeneratedProject render(const NetworkIR& net, const Schedule& schedule,
                        const CostModelConfig& cfg, std::string_view main_template) {
  check_coverage(net, schedule);

  TemplateValues globals{
      {"template_version", std::to_string(kTemplateVersion)},
      {"network", comment_safe(net.name)},
      {"strategy", comment_safe(schedule.strategy)},
      {"binary", identifier(net.name)},
  };
  std::vector<TemplateValues> blocks;
  for (std::size_t i = 0; i < schedule.blocks.size(); ++i) {
    const auto& b = schedule.blocks[i];
    std::string ids;
    std::string ops;
    for (auto id : b.layer_ids) {
      ids += (ids.empty() ? "" : ",") + std::to_string(id);
      ops += op_lines(net.layers[static_cast<std::size_t>(id)]);
    }
    blocks.push_back({{"index", std::to_string(i)},
                      {"layers", ids},
                      {"mp", std::to_string(b.mp)},
                      {"ops", ops}});
  }

  GeneratedProject project;
  project.entry_point = "main.cpp";
  project.source_files.emplace_back("main.cpp", expand_template(main_template, globals, blocks));
  project.source_files.emplace_back("dlfusion_config.h", config_header(net, cfg));
  project.source_files.emplace_back("build.sh", expand_template(kBuildScript, globals, {}));
  return project;
}

void emit(const GeneratedProject& project, const std::filesystem::path& out_dir, bool force) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(out_dir, ec)) {
    if (!fs::is_directory(out_dir, ec)) {
      throw ExistsError("'" + out_dir.string() + "' exists and is not a directory");
    }
    if (!fs::is_empty(out_dir, ec) && !force) {
      throw ExistsError("output directory '" + out_dir.string() +
                        "' is not empty (use --force to overwrite)");
    }
  }
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create '" + out_dir.string() + "': " + ec.message());

  for (const auto& [rel, text] : project.source_files) {
    const auto path = out_dir / rel;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.close();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    if (path.extension() == ".sh") {
      fs::permissions(path, fs::perms::owner_exec | fs::perms::group_exec | fs::perms::others_exec,
                      fs::perm_options::add, ec);
      if (ec) throw IoError("cannot mark '" + path.string() + "' executable: " + ec.message());
    }
  }
}

}  // namespace dlfusion
