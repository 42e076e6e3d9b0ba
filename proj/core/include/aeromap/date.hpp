#pragma once

#include <compare>
#include <string>

namespace aeromap {

/// Proleptic Gregorian calendar date. Value type, totally ordered.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  auto operator<=>(const Date&) const = default;

  /// Days since 1970-01-01 (may be negative).
  long long to_days() const;
  static Date from_days(long long days);

  Date plus_days(long long n) const { return from_days(to_days() + n); }

  /// 1..366
  int day_of_year() const;

  bool is_valid() const;

  /// ISO-8601 YYYY-MM-DD.
  std::string to_string() const;
  static Date parse(const std::string& iso);
};

/// Warm season is April through September, cold season October through March.
enum class Season { Warm, Cold };

Season season_of(const Date& date);
Season season_of_month(int month);

const char* to_string(Season s);

}  // namespace aeromap
