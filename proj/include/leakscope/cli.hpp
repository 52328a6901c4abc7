// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>

namespace leakscope {

/// Process exit codes.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitRegression = 3,
};

/// Entry point behind the `leakscope` executable. Subcommands: scan, mask,
/// prompts, probe, score, diff, gate, oracle-serve.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace leakscope
