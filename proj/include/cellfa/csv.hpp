#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cellfa {

// Streaming CSV reader: comma separated, double-quote escaping, quoted fields
// may contain separators and newlines, tolerates CRLF.
class CsvReader {
 public:
  explicit CsvReader(std::istream& in) : in_(in) {}

  // Reads one record into `fields` (reusing their buffers). Returns false at EOF.
  bool next_row(std::vector<std::string>& fields);

  std::size_t row_number() const { return row_number_; }  // 1-based, last returned row

 private:
  std::istream& in_;
  std::string line_;
  std::size_t row_number_ = 0;
};

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double value);

// Accepts plain decimals and thousands-separated values ("4,239,906.386");
// separators are stripped before parsing. Rejects trailing garbage.
bool parse_double_field(std::string_view text, double& out);

bool parse_int_field(std::string_view text, int& out);

}  // namespace cellfa
