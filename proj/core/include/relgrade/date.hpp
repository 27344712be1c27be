#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace relgrade {

/// Calendar day, ISO-8601 "YYYY-MM-DD" on the wire.
struct Date {
  std::int32_t year = 0;
  std::uint32_t month = 0;  // 1..12
  std::uint32_t day = 0;    // 1..31

  /// Strict parse of "YYYY-MM-DD"; rejects invalid calendar dates.
  static std::optional<Date> parse(std::string_view s);

  std::string to_string() const;

  bool valid() const;

  /// Days since the civil epoch; basis for ordering and iteration.
  std::int64_t serial() const;

  static Date from_serial(std::int64_t days);

  Date next_day() const { return from_serial(serial() + 1); }

  friend auto operator<=>(const Date& a, const Date& b) {
    return a.serial() <=> b.serial();
  }
  friend bool operator==(const Date& a, const Date& b) {
    return a.year == b.year && a.month == b.month && a.day == b.day;
  }
};

}  // namespace relgrade
