#pragma once

#include <string>
#include <vector>

namespace demsr::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Entry point behind the `demsr` binary. Returns 0 on success, 1 on domain
/// errors (single-line diagnostic on stderr), 2 on usage errors.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace demsr::cli
