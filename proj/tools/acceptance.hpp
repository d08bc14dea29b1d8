#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wavechaos::cli {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

inline constexpr int kCriteria = 12;

// "all" or a comma-separated list of ids in [1, 12].
[[nodiscard]] std::vector<int> parse_sections(const std::string& text);

// Runs the selected criteria in order. When `progress` is set, each result
// line is written there as soon as it is known.
[[nodiscard]] std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                                          std::ostream* progress = nullptr);

// "[PASS] 4  chaos oracle d=1 white: ... (1.2 s)"
[[nodiscard]] std::string format_line(const CriterionResult& result);

}  // namespace wavechaos::cli
