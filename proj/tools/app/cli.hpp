#pragma once

#include <ostream>

namespace netsig::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAnalysisError = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by the `netsig` binary and in-process tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netsig::app
