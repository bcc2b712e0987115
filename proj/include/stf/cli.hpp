#pragma once

namespace stf {

/// Full command-line driver (subcommands: synth, train, evaluate, predict,
/// graph-dump, plot). Returns the process exit code; never throws.
int run_cli(int argc, const char* const* argv);

}  // namespace stf
