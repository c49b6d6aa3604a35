#include "csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace isodiff {

std::string fmt_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvWriter::add_row(std::vector<std::string> fields) {
  if (fields.size() != header_.size()) {
    throw IoError("csv: row width does not match header");
  }
  for (const std::string& f : fields) {
    if (f.find(',') != std::string::npos || f.find('\n') != std::string::npos) {
      throw IoError("csv: field contains delimiter: " + f);
    }
  }
  rows_.push_back(std::move(fields));
}

void CsvWriter::write(const std::string& path) const {
  std::ostringstream out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out << ',';
    out << header_[i];
  }
  out << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << row[i];
    }
    out << '\n';
  }
  const std::string text = out.str();
  const std::string tmp = path + ".tmp";
  std::FILE* f = std::fopen(tmp.c_str(), "wb");
  if (!f) throw IoError("csv: cannot open for write: " + tmp);
  const std::size_t written = std::fwrite(text.data(), 1, text.size(), f);
  const int closed = std::fclose(f);
  if (written != text.size() || closed != 0) {
    std::remove(tmp.c_str());
    throw IoError("csv: short write: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    std::remove(tmp.c_str());
    throw IoError("csv: rename failed: " + path);
  }
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot read: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;
    std::vector<double> row;
    bool parse_ok = true;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      char* end = nullptr;
      const double v = std::strtod(item.c_str(), &end);
      while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
      if (end == item.c_str() || (end && *end != '\0')) {
        parse_ok = false;
        break;
      }
      row.push_back(v);
    }
    if (!parse_ok) {
      if (first) {
        first = false;
        continue;  // header line
      }
      throw IoError("csv: non-numeric row in " + path);
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace isodiff
