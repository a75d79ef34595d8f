#include "cellfa/calendar.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>

namespace cellfa {

namespace {

std::chrono::year_month_day to_ymd(const CivilDate& d) {
  return std::chrono::year_month_day{std::chrono::year{d.year},
                                     std::chrono::month{static_cast<unsigned>(d.month)},
                                     std::chrono::day{static_cast<unsigned>(d.day)}};
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

bool valid_date(const CivilDate& d) { return to_ymd(d).ok(); }

long day_number(const CivilDate& d) {
  return std::chrono::sys_days{to_ymd(d)}.time_since_epoch().count();
}

CivilDate add_days(const CivilDate& d, int days) {
  std::chrono::year_month_day ymd{std::chrono::sys_days{to_ymd(d)} + std::chrono::days{days}};
  return CivilDate{static_cast<int>(ymd.year()), static_cast<int>(unsigned{ymd.month()}),
                   static_cast<int>(unsigned{ymd.day()})};
}

int day_of_week(const CivilDate& d) {
  std::chrono::weekday wd{std::chrono::sys_days{to_ymd(d)}};
  return static_cast<int>(wd.iso_encoding()) - 1;  // iso: Mon=1..Sun=7
}

std::optional<CivilDate> parse_date(std::string_view text) {
  CivilDate d;
  auto try_split = [&](char sep, bool year_first) {
    std::size_t a = text.find(sep);
    if (a == std::string_view::npos) return false;
    std::size_t b = text.find(sep, a + 1);
    if (b == std::string_view::npos || text.find(sep, b + 1) != std::string_view::npos)
      return false;
    int f0, f1, f2;
    if (!parse_int(text.substr(0, a), f0) || !parse_int(text.substr(a + 1, b - a - 1), f1) ||
        !parse_int(text.substr(b + 1), f2))
      return false;
    d = year_first ? CivilDate{f0, f1, f2} : CivilDate{f2, f1, f0};
    return true;
  };
  if (!try_split('-', true) && !try_split('.', false)) return std::nullopt;
  if (!valid_date(d)) return std::nullopt;
  return d;
}

std::string format_date(const CivilDate& d) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
  return buf;
}

}  // namespace cellfa
