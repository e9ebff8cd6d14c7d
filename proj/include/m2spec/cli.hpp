#pragma once

#include <iosfwd>

namespace m2spec {

/// Command-line entry point: `run`, `estimate`, `simulate`, `policy-check`.
/// Exit status: 0 success, 1 run failure, 2 usage or configuration error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace m2spec
