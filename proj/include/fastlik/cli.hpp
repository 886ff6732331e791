#pragma once

#include <iosfwd>

namespace fastlik::cli {

// Exit statuses shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitBadConfig = 2;
inline constexpr int kExitIo = 3;

/// Parses arguments and runs one of: power-study, fit-mixture, validate-interp,
/// calibrate, bench. Returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace fastlik::cli
