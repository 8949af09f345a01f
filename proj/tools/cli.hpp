#pragma once

#include <iosfwd>

namespace dlfusion::cli {

/// Runs one `dlfusion` invocation. Returns the process exit code:
/// 0 success, 1 usage error, 2 input error, 3 runtime error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dlfusion::cli
