#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dlfusion/cost_config.hpp"
#include "dlfusion/model_ir.hpp"
#include "dlfusion/schedule.hpp"

namespace dlfusion {

inline constexpr int kTemplateVersion = 1;

using TemplateValues = std::map<std::string, std::string, std::less<>>;

/// Replaces `{{name}}` with globals[name] and repeats the single
/// `{{#blocks}}...{{/blocks}}` section once per entry of `blocks`, where block
/// values shadow globals. Unknown placeholders and unbalanced sections throw
/// TemplateError.
std::string expand_template(std::string_view text, const TemplateValues& globals,
                            const std::vector<TemplateValues>& blocks);

/// Template of the generated main.cpp.
std::string_view default_main_template();

struct GeneratedProject {
  /// (relative path, contents), in emission order.
  std::vector<std::pair<std::filesystem::path, std::string>> source_files;
  std::filesystem::path entry_point;
};

/// Inference-session source for `schedule` against the sdk stub: main.cpp,
/// dlfusion_config.h (device parameters of `cfg`) and build.sh.
GeneratedProject render(const NetworkIR& net, const Schedule& schedule,
                        const CostModelConfig& cfg = {},
                        std::string_view main_template = default_main_template());

/// Writes every file under out_dir. A non-empty out_dir is only written with
/// `force`. Throws ExistsError / IoError.
void emit(const GeneratedProject& project, const std::filesystem::path& out_dir, bool force);

}  // namespace dlfusion
