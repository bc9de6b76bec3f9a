#include "msde/csv.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace msde {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_quote(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (const char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header)
    : out_(out), columns_(header.size()) {
  if (header.empty()) throw std::logic_error("csv header must not be empty");
  for (const auto& h : header) field(h);
  filled_ = columns_;
  out_ << "\r\n";
  filled_ = 0;
}

void CsvWriter::separator() {
  if (filled_ > 0) out_ << ',';
  ++filled_;
}

CsvWriter& CsvWriter::field(std::string_view s) {
  separator();
  out_ << csv_quote(s);
  return *this;
}

CsvWriter& CsvWriter::field(double v) {
  separator();
  out_ << format_double(v);
  return *this;
}

CsvWriter& CsvWriter::field(std::int64_t v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(std::uint64_t v) {
  separator();
  out_ << v;
  return *this;
}

CsvWriter& CsvWriter::field(const std::optional<double>& v) {
  if (v) return field(*v);
  separator();
  return *this;
}

void CsvWriter::end_row() {
  if (filled_ != columns_)
    throw std::logic_error("csv row has " + std::to_string(filled_) + " fields, expected " +
                           std::to_string(columns_));
  out_ << "\r\n";
  filled_ = 0;
  ++rows_;
}

}  // namespace msde
