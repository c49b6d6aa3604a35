#pragma once

#include <string>
#include <vector>

#include "errors.hpp"

namespace isodiff {

// Formats a double with 17 significant digits (round-trip exact at 64-bit).
std::string fmt_real(double v);

// Accumulates rows, then writes atomically (temp file + rename). Fields must
// not contain the delimiter.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  void write(const std::string& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

// Reads rows of comma-separated reals; a first line that fails to parse
// entirely as numbers is treated as a header and skipped. '#' comments and
// blank lines are ignored.
std::vector<std::vector<double>> read_numeric_csv(const std::string& path);

}  // namespace isodiff
