#include "wavechaos/io.hpp"

#include <cstdio>
#include <fstream>

#include "wavechaos/errors.hpp"

namespace wavechaos {

void write_file_atomically(const std::string& path, std::string_view contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open " + tmp + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw NumericalError("failed writing " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw NumericalError("cannot move " + tmp + " to " + path);
}

std::string format_exact(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace wavechaos
