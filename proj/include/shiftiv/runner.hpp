#pragma once

#include "shiftiv/config.hpp"

namespace shiftiv {

// Executes the configured subcommand and writes its outputs plus a manifest
// into the output directory. Throws Error on failure; callers map the error
// class to a process exit code. Outputs are byte-identical for identical
// configs regardless of thread count, and the manifest omits execution-only
// knobs (threads, out) so a rerun from it reproduces every file exactly.
void run(const RunConfig& config);

}  // namespace shiftiv
