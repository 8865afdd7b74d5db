#include "mixtraffic/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace mixtraffic {

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

double round_to_printed(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_number(value).c_str(), nullptr);
}

void CsvWriter::header(std::initializer_list<std::string_view> columns) {
  for (auto c : columns) field(c);
  end_row();
}

void CsvWriter::header(const std::vector<std::string>& columns) {
  for (const auto& c : columns) field(std::string_view(c));
  end_row();
}

CsvWriter& CsvWriter::field(std::string_view text) {
  if (row_started_) out_ << ',';
  out_ << text;
  row_started_ = true;
  return *this;
}

CsvWriter& CsvWriter::field(double value) { return field(std::string_view(format_number(value))); }

CsvWriter& CsvWriter::field(long long value) { return field(std::string_view(std::to_string(value))); }

void CsvWriter::end_row() {
  out_ << '\n';
  row_started_ = false;
}

}  // namespace mixtraffic
