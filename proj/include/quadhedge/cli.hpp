#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace quadhedge::cli {

/// Runs one CLI invocation. Returns 0 on success, 1 on validation or
/// computation failure, 2 on usage errors.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace quadhedge::cli
