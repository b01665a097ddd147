#pragma once

namespace switchdp::cli {

/// Entry point for the `switchdp` command-line tool; exposed as a library
/// function so tests can drive the CLI in-process.
///
/// Exit codes: 0 success, 2 configuration/input error, 3 training or
/// simulation failure, 4 enumeration-budget refusal.
int run(int argc, const char* const* argv);

}  // namespace switchdp::cli
