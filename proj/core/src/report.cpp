#include "confdr/report.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace confdr {

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::begin_row() {
  rows_.emplace_back();
  rows_.back().reserve(header_.size());
  return *this;
}

CsvTable& CsvTable::cell(const std::string& value) {
  rows_.back().push_back(value);
  return *this;
}

CsvTable& CsvTable::cell(double value) { return cell(format_double(value)); }

CsvTable& CsvTable::cell(long value) { return cell(std::to_string(value)); }

std::string CsvTable::format_double(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", value);
  return buf;
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out += ',';
    out += header_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_string();
}

void SummaryReport::check(const std::string& name, bool passed, const std::string& detail) {
  std::string line = (passed ? "PASS " : "FAIL ") + name;
  if (!detail.empty()) line += "  [" + detail + "]";
  lines_.push_back(std::move(line));
  if (!passed) ++failures_;
}

void SummaryReport::note(const std::string& line) { lines_.push_back("     " + line); }

std::string SummaryReport::to_string() const {
  std::string out;
  for (const auto& l : lines_) {
    out += l;
    out += '\n';
  }
  return out;
}

void SummaryReport::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << to_string();
}

}  // namespace confdr
