#pragma once

#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <string>
#include <vector>

#include "tvbeta/errors.hpp"

namespace tvbeta {

// Shortest round-trip decimal form, identical across runs.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

// Minimal comma-separated writer with '\n' line ends; values are written
// verbatim (the outputs here never contain commas or quotes).
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw DataError("cannot open for writing: " + path);
  }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out_ << ',';
      out_ << cells[i];
    }
    out_ << '\n';
  }

  void row(std::initializer_list<std::string> cells) {
    row(std::vector<std::string>(cells));
  }

 private:
  std::ofstream out_;
};

}  // namespace tvbeta
