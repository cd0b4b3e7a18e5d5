#pragma once

#include <iosfwd>

namespace reachplan::cli {

/// Runs one subcommand. Returns 0 on success, 1 on a domain failure
/// (infeasible program, failed validation, crash) and 2 on usage errors.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace reachplan::cli
