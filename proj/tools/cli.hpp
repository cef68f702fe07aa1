#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace contraction::cli {

enum ExitCode : int { kSuccess = 0, kCertifiedFailure = 1, kUsageError = 2 };

/// Runs one contraction-kit invocation. args excludes the program name.
/// Output goes to out (or the --out file), diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, const char* const* argv);

/// key=value pairs of a config file. Lines "# config: key=value" (the echo
/// format) are read as settings; other lines starting with '#' are comments.
std::vector<std::pair<std::string, std::string>> read_config(std::istream& in);

}  // namespace contraction::cli
