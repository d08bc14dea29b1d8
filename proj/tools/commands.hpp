#pragma once

#include <string>

#include "record.hpp"
#include "run_config.hpp"

namespace wavechaos::cli {

struct Outcome {
  Record record;
  int status = 0;  // 1 when a checked inequality or acceptance criterion fails
};

[[nodiscard]] Outcome execute(const RunConfig& config);

// Full CLI: parses argv, runs the command, writes --out and prints the
// structured-text record. Returns 0, 1 (check failed) or 2 (config error).
int run(int argc, const char* const* argv);

}  // namespace wavechaos::cli
