#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kst::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;        // parse, validation and I/O errors
inline constexpr int kHypothesisFails = 2;  // check-matrix: attraction hypothesis violated
inline constexpr int kBlowup = 3;          // simulate: run ended in numerical blow-up

/// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kst::cli
