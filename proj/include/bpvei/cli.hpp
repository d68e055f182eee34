#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bpvei::cli {

enum ExitCode : int { ok = 0, usage_error = 1, numeric_guard = 2 };

/// Runs one subcommand. `args` excludes the program name. Results go to the
/// --out path (plus a .manifest.json next to it) or to `out` when no path is given.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int dispatch(int argc, const char* const* argv);

}  // namespace bpvei::cli
