#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace impartial::cli {

/// Exit codes: 0 success, 1 I/O or data error, 2 usage or contract error.
enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2 };

/// Runs the `impartial` command line. `argv[0]` is the program name.
/// Reports go to `out`, diagnostics and warnings to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Same, with the arguments after the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace impartial::cli
