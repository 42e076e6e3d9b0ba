#include "aeromap/date.hpp"

#include <array>
#include <cstdio>

#include "aeromap/errors.hpp"

namespace aeromap {

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static constexpr std::array<int, 12> lengths = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return lengths[m - 1];
}

}  // namespace

// Civil-days conversion (Howard Hinnant's algorithm).
long long Date::to_days() const {
  int y = year;
  const int m = month;
  const int d = day;
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long long>(doe) - 719468;
}

Date Date::from_days(long long days) {
  days += 719468;
  const long long era = (days >= 0 ? days : days - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(days - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const long long y = static_cast<long long>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  const unsigned d = doy - (153 * mp + 2) / 5 + 1;
  const unsigned m = mp + (mp < 10 ? 3 : -9);
  return Date{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

int Date::day_of_year() const {
  return static_cast<int>(to_days() - Date{year, 1, 1}.to_days()) + 1;
}

bool Date::is_valid() const {
  return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date Date::parse(const std::string& iso) {
  int y = 0, m = 0, d = 0;
  char extra = 0;
  if (std::sscanf(iso.c_str(), "%d-%d-%d%c", &y, &m, &d, &extra) != 3 || iso.size() != 10) {
    throw ParseError("invalid ISO date '" + iso + "'");
  }
  Date date{y, m, d};
  if (!date.is_valid()) throw ParseError("invalid calendar date '" + iso + "'");
  return date;
}

Season season_of_month(int month) {
  return (month >= 4 && month <= 9) ? Season::Warm : Season::Cold;
}

Season season_of(const Date& date) { return season_of_month(date.month); }

const char* to_string(Season s) { return s == Season::Warm ? "warm" : "cold"; }

}  // namespace aeromap
