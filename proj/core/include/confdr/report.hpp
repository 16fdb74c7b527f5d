#pragma once

#include <string>
#include <vector>

namespace confdr {

/// Deterministic CSV writer: UTF-8, header row, '.' decimal separator,
/// rows emitted in insertion order, %.12g float formatting. Identical
/// inputs produce identical bytes.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  CsvTable& begin_row();
  CsvTable& cell(const std::string& value);
  CsvTable& cell(double value);
  CsvTable& cell(long value);
  CsvTable& cell(int value) { return cell(static_cast<long>(value)); }

  std::size_t row_count() const { return rows_.size(); }
  std::string to_string() const;
  void write_file(const std::string& path) const;

  static std::string format_double(double value);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Plain-text summary: one "PASS"/"FAIL" line per named check plus free
/// annotations; `all_passed` aggregates.
class SummaryReport {
 public:
  void check(const std::string& name, bool passed, const std::string& detail = "");
  void note(const std::string& line);
  bool all_passed() const { return failures_ == 0; }
  int failure_count() const { return failures_; }
  std::string to_string() const;
  void write_file(const std::string& path) const;

 private:
  std::vector<std::string> lines_;
  int failures_ = 0;
};

}  // namespace confdr
