#pragma once

namespace propinf {

/// Command-line entry point. Subcommands: generate, attack, game, sweep,
/// verify-theory, metrics. Exit codes: 0 success, 1 runtime failure,
/// 2 usage error.
int run_cli(int argc, const char* const* argv);

}  // namespace propinf
