#pragma once

#include <string>
#include <utility>
#include <vector>

namespace wavechaos::cli {

// Result of one CLI run: scalar fields plus an optional numeric table.
// Scalars are kept as text so that writing and re-reading is lossless.
struct Record {
  std::string command;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> fields;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, bool value);
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  [[nodiscard]] const std::string& get(const std::string& key) const;

  bool operator==(const Record&) const = default;
};

enum class Format { csv, text };

[[nodiscard]] Format format_from_string(const std::string& name);

// CSV: "# key=value" comment lines, then the header and rows at 17
// significant digits. Text: "key = value" lines, then a [table] section.
[[nodiscard]] std::string to_csv(const Record& record);
[[nodiscard]] std::string to_text(const Record& record);
[[nodiscard]] Record parse_csv(const std::string& text);
[[nodiscard]] Record parse_text(const std::string& text);

[[nodiscard]] std::string render(const Record& record, Format format);
[[nodiscard]] Record parse(const std::string& text, Format format);

}  // namespace wavechaos::cli
