#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "omg/error.hpp"

namespace omg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

/// 1 for errors caused by the input or configuration, 2 for failures while
/// running (backends, filesystem).
int exit_code_for(ErrorCode code);

/// Runs the command line without the program name, e.g.
/// {"--config", "run.json", "annotate"}. Safe to call repeatedly in one
/// process.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace omg
