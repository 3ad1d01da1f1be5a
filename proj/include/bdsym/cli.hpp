#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bdsym::cli {

/// Runs one CLI command. `args` excludes the program name. Returns the
/// process exit code: 0 success, 1 validation/computation failure,
/// 2 argument errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bdsym::cli
