#pragma once

#include <iosfwd>

namespace abw::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitPrecondition = 3;
inline constexpr int kExitVerification = 4;

// Entry point shared by the executable and the tests. Reports go to `out`,
// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace abw::cli
