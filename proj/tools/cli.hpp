#pragma once

#include <iosfwd>

namespace stochmoments::cli {

/// Runs one subcommand. Returns 0 on success, 2 on a usage error (unknown or
/// malformed flag), 1 when the computation itself fails. Results go to `out`
/// unless --output names a file; diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace stochmoments::cli
