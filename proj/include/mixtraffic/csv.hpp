#pragma once

#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace mixtraffic {

/// Fixed 9-significant-digit rendering used for every emitted number.
std::string format_number(double value);

/// Rounds to the value printed by format_number, so JSON output carries the
/// same precision as CSV.
double round_to_printed(double value);

class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& out) : out_(out) {}

  void header(std::initializer_list<std::string_view> columns);
  void header(const std::vector<std::string>& columns);

  /// Appends one field to the current row.
  CsvWriter& field(std::string_view text);
  CsvWriter& field(double value);
  CsvWriter& field(long long value);
  CsvWriter& field(int value) { return field(static_cast<long long>(value)); }
  CsvWriter& empty_field() { return field(std::string_view{}); }
  void end_row();

 private:
  std::ostream& out_;
  bool row_started_ = false;
};

}  // namespace mixtraffic
