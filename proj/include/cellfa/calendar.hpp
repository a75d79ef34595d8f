#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace cellfa {

// Plain calendar date. KPI timestamps are local wall-clock slots; there is no
// timezone arithmetic anywhere in the pipeline.
struct CivilDate {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const CivilDate&) const = default;
};

bool valid_date(const CivilDate& d);

// Days since 1970-01-01.
long day_number(const CivilDate& d);

CivilDate add_days(const CivilDate& d, int days);

// 0 = Monday .. 6 = Sunday.
int day_of_week(const CivilDate& d);

// Accepts YYYY-MM-DD and DD.MM.YYYY.
std::optional<CivilDate> parse_date(std::string_view text);

std::string format_date(const CivilDate& d);  // YYYY-MM-DD

}  // namespace cellfa
