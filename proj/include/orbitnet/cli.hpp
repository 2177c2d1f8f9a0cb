#pragma once

#include <iosfwd>

namespace orbitnet::cli {

/// Exit codes: 0 success, 1 runtime failure, 2 usage or validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace orbitnet::cli
