#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace atomchip {

// Column-oriented CSV writer: '.' decimal separator, %.9e numbers, comma
// delimiter, LF line endings — byte-identical output for identical input.
class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header);

  void row(const std::vector<double>& values); // throws ValidationError on width mismatch
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const; // atomic: tmp file + rename

  size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

std::string format_csv_number(double value); // %.9e

} // namespace atomchip
