#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace plspb::cli {

inline constexpr const char* kToolVersion = "0.1.0";

/// Exit codes besides 0 (success) and CLI11's own parse codes.
inline constexpr int kExitError = 2;
inline constexpr int kExitSelfCheck = 3;
inline constexpr int kExitMismatch = 4;

/// Runs one command line (without the program name). Output meant for the
/// user goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// 64-bit FNV-1a of `bytes`, as 16 hex digits. Recorded per output file in manifests.
std::string content_hash(const std::string& bytes);

}  // namespace plspb::cli
