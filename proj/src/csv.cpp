#include "cellfa/csv.hpp"

#include <charconv>
#include <istream>
#include <ostream>

namespace cellfa {

bool CsvReader::next_row(std::vector<std::string>& fields) {
  if (!std::getline(in_, line_)) return false;
  ++row_number_;
  if (!line_.empty() && line_.back() == '\r') line_.pop_back();

  std::size_t field_index = 0;
  auto field_at = [&](std::size_t i) -> std::string& {
    if (i >= fields.size()) fields.emplace_back();
    fields[i].clear();
    return fields[i];
  };
  std::string* current = &field_at(field_index);

  bool in_quotes = false;
  std::size_t pos = 0;
  while (true) {
    if (pos == line_.size()) {
      if (!in_quotes) break;
      // Quoted newline: pull the next physical line into the same record.
      if (!std::getline(in_, line_)) break;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      current->push_back('\n');
      pos = 0;
      continue;
    }
    char c = line_[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < line_.size() && line_[pos + 1] == '"') {
          current->push_back('"');
          ++pos;
        } else {
          in_quotes = false;
        }
      } else {
        current->push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      current = &field_at(++field_index);
    } else {
      current->push_back(c);
    }
    ++pos;
  }
  fields.resize(field_index + 1);
  return true;
}

namespace {

bool needs_quoting(std::string_view s) {
  return s.find_first_of(",\"\n\r") != std::string_view::npos;
}

}  // namespace

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.put(',');
    const std::string& f = fields[i];
    if (needs_quoting(f)) {
      out.put('"');
      for (char c : f) {
        if (c == '"') out.put('"');
        out.put(c);
      }
      out.put('"');
    } else {
      out.write(f.data(), static_cast<std::streamsize>(f.size()));
    }
  }
  out.put('\n');
}

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

bool parse_double_field(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return false;

  char buf[64];
  std::size_t n = 0;
  for (char c : text) {
    if (c == ',') continue;  // thousands separator
    if (n >= sizeof(buf) - 1) return false;
    buf[n++] = c;
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(buf, buf + n, v);
  if (ec != std::errc{} || ptr != buf + n) return false;
  out = v;
  return true;
}

bool parse_int_field(std::string_view text, int& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  if (text.empty()) return false;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc{} && ptr == text.data() + text.size();
}

}  // namespace cellfa
