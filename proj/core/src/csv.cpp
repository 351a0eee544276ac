#include "atomchip/csv.hpp"

#include <cstdio>
#include <fstream>

#include "atomchip/errors.hpp"

namespace atomchip {

std::string format_csv_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", value);
  return buf;
}

CsvWriter::CsvWriter(std::vector<std::string> header)
    : header_(std::move(header)) {
  if (header_.empty()) throw ValidationError("CsvWriter: empty header");
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != header_.size())
    throw ValidationError("CsvWriter: row width " +
                          std::to_string(values.size()) + " != header width " +
                          std::to_string(header_.size()));
  rows_.push_back(values);
}

void CsvWriter::write(std::ostream& out) const {
  for (size_t i = 0; i < header_.size(); ++i)
    out << (i ? "," : "") << header_[i];
  out << '\n';
  for (const auto& r : rows_) {
    for (size_t i = 0; i < r.size(); ++i)
      out << (i ? "," : "") << format_csv_number(r[i]);
    out << '\n';
  }
}

void CsvWriter::write_file(const std::string& path) const {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw Error("CsvWriter: cannot open " + tmp);
    write(out);
    if (!out) throw Error("CsvWriter: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw Error("CsvWriter: cannot rename " + tmp + " to " + path);
}

} // namespace atomchip
