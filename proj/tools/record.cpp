#include "record.hpp"

#include <sstream>

#include "wavechaos/errors.hpp"
#include "wavechaos/io.hpp"

namespace wavechaos::cli {

namespace {

std::string join_row(const std::vector<double>& row) {
  std::string out;
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) out += ',';
    out += format_exact(row[i]);
  }
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!line.empty() && line.back() == sep) parts.emplace_back();
  return parts;
}

std::vector<double> parse_row(const std::string& line, std::size_t width) {
  std::vector<double> row;
  for (const auto& cell : split(line, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(cell, &used);
    } catch (const std::exception&) {
      throw ConfigError("not a number in record table: '" + cell + "'");
    }
    if (used != cell.size()) throw ConfigError("trailing characters in record cell '" + cell + "'");
    row.push_back(v);
  }
  if (row.size() != width) throw ConfigError("record row has the wrong number of cells");
  return row;
}

// Splits "key<sep>value" at the first separator.
std::pair<std::string, std::string> key_value(const std::string& line, const std::string& sep) {
  const auto at = line.find(sep);
  if (at == std::string::npos) throw ConfigError("malformed record line '" + line + "'");
  return {line.substr(0, at), line.substr(at + sep.size())};
}

void assign(Record& r, const std::string& key, const std::string& value) {
  if (key == "command")
    r.command = value;
  else if (key == "config_hash")
    r.config_hash = value;
  else
    r.fields.emplace_back(key, value);
}

}  // namespace

void Record::set(const std::string& key, double value) { set(key, format_exact(value)); }
void Record::set(const std::string& key, long long value) { set(key, std::to_string(value)); }
void Record::set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

void Record::set(const std::string& key, const std::string& value) {
  require(key.find_first_of("=\n,") == std::string::npos && key.find(" = ") == std::string::npos,
          "record keys may not contain '=', ',' or newlines");
  require(value.find('\n') == std::string::npos, "record values may not contain newlines");
  for (auto& [k, v] : fields)
    if (k == key) {
      v = value;
      return;
    }
  fields.emplace_back(key, value);
}

const std::string& Record::get(const std::string& key) const {
  for (const auto& [k, v] : fields)
    if (k == key) return v;
  throw ConfigError("record has no field '" + key + "'");
}

Format format_from_string(const std::string& name) {
  if (name == "csv") return Format::csv;
  if (name == "text" || name == "structured-text") return Format::text;
  throw ConfigError("unknown output format '" + name + "' (csv or text)");
}

std::string to_csv(const Record& record) {
  std::string out = "# command=" + record.command + "\n# config_hash=" + record.config_hash + "\n";
  for (const auto& [k, v] : record.fields) out += "# " + k + "=" + v + "\n";
  if (!record.columns.empty()) {
    for (std::size_t i = 0; i < record.columns.size(); ++i) out += (i ? "," : "") + record.columns[i];
    out += '\n';
    for (const auto& row : record.rows) out += join_row(row) + '\n';
  }
  return out;
}

std::string to_text(const Record& record) {
  std::string out = "command = " + record.command + "\nconfig_hash = " + record.config_hash + "\n";
  for (const auto& [k, v] : record.fields) out += k + " = " + v + "\n";
  if (!record.columns.empty()) {
    out += "[table]\n";
    for (std::size_t i = 0; i < record.columns.size(); ++i) out += (i ? "," : "") + record.columns[i];
    out += '\n';
    for (const auto& row : record.rows) out += join_row(row) + '\n';
  }
  return out;
}

Record parse_csv(const std::string& text) {
  Record r;
  std::istringstream in(text);
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (!header && line.rfind("# ", 0) == 0) {
      const auto [k, v] = key_value(line.substr(2), "=");
      assign(r, k, v);
    } else if (!header) {
      r.columns = split(line, ',');
      header = true;
    } else {
      r.rows.push_back(parse_row(line, r.columns.size()));
    }
  }
  return r;
}

Record parse_text(const std::string& text) {
  Record r;
  std::istringstream in(text);
  std::string line;
  bool table = false, header = false;
  while (std::getline(in, line)) {
    if (!table) {
      if (line == "[table]") {
        table = true;
        continue;
      }
      const auto [k, v] = key_value(line, " = ");
      assign(r, k, v);
    } else if (!header) {
      r.columns = split(line, ',');
      header = true;
    } else {
      r.rows.push_back(parse_row(line, r.columns.size()));
    }
  }
  return r;
}

std::string render(const Record& record, Format format) {
  return format == Format::csv ? to_csv(record) : to_text(record);
}

Record parse(const std::string& text, Format format) {
  return format == Format::csv ? parse_csv(text) : parse_text(text);
}

}  // namespace wavechaos::cli
