#include "relgrade/date.hpp"

#include <cctype>
#include <chrono>
#include <cstdio>

namespace relgrade {

namespace {

bool all_digits(std::string_view s) {
  for (char c : s) {
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  }
  return !s.empty();
}

std::chrono::year_month_day to_ymd(const Date& d) {
  return std::chrono::year_month_day{std::chrono::year{d.year},
                                     std::chrono::month{d.month},
                                     std::chrono::day{d.day}};
}

}  // namespace

std::optional<Date> Date::parse(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  const std::string_view ys = s.substr(0, 4), ms = s.substr(5, 2), ds = s.substr(8, 2);
  if (!all_digits(ys) || !all_digits(ms) || !all_digits(ds)) return std::nullopt;
  Date d;
  d.year = (ys[0] - '0') * 1000 + (ys[1] - '0') * 100 + (ys[2] - '0') * 10 + (ys[3] - '0');
  d.month = static_cast<std::uint32_t>((ms[0] - '0') * 10 + (ms[1] - '0'));
  d.day = static_cast<std::uint32_t>((ds[0] - '0') * 10 + (ds[1] - '0'));
  if (!d.valid()) return std::nullopt;
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year, month, day);
  return buf;
}

bool Date::valid() const { return to_ymd(*this).ok(); }

std::int64_t Date::serial() const {
  return std::chrono::sys_days{to_ymd(*this)}.time_since_epoch().count();
}

Date Date::from_serial(std::int64_t days) {
  const std::chrono::year_month_day ymd{
      std::chrono::sys_days{std::chrono::days{days}}};
  Date d;
  d.year = static_cast<std::int32_t>(static_cast<int>(ymd.year()));
  d.month = static_cast<unsigned>(ymd.month());
  d.day = static_cast<unsigned>(ymd.day());
  return d;
}

}  // namespace relgrade
