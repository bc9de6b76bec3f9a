#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace msde {

/// Shortest decimal text that reads back to the same double ('.' separator).
/// Non-finite values print as nan, inf, -inf.
std::string format_double(double v);

/// RFC 4180 field quoting: fields containing a comma, quote, CR or LF are
/// wrapped in double quotes with embedded quotes doubled.
std::string csv_quote(std::string_view field);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);

  CsvWriter& field(std::string_view s);
  CsvWriter& field(const char* s) { return field(std::string_view(s)); }
  CsvWriter& field(const std::string& s) { return field(std::string_view(s)); }
  CsvWriter& field(double v);
  CsvWriter& field(std::int64_t v);
  CsvWriter& field(std::uint64_t v);
  CsvWriter& field(int v) { return field(static_cast<std::int64_t>(v)); }
  CsvWriter& field(bool v) { return field(std::string_view(v ? "1" : "0")); }
  /// Empty optional prints as an empty field.
  CsvWriter& field(const std::optional<double>& v);
  /// Ends the current row; throws std::logic_error on a column-count mismatch.
  void end_row();

  std::size_t rows() const { return rows_; }

 private:
  void separator();
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
  std::size_t rows_ = 0;
};

}  // namespace msde
