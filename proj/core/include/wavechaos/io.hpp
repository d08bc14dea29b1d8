#pragma once

#include <string>
#include <string_view>

namespace wavechaos {

// Writes `contents` to path + ".tmp" and renames it over `path`.
void write_file_atomically(const std::string& path, std::string_view contents);

// printf("%.17g"), so that parsing the text restores the double exactly.
[[nodiscard]] std::string format_exact(double value);

}  // namespace wavechaos
