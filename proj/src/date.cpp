#include "volcast/date.hpp"

#include <charconv>
#include <cstdio>

namespace volcast {

namespace {
std::chrono::year_month_day ymd_of(std::chrono::sys_days d) { return std::chrono::year_month_day(d); }

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}
}  // namespace

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  return Date(std::chrono::sys_days(std::chrono::year(year) / std::chrono::month(month) / std::chrono::day(day)));
}

std::optional<Date> Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') return std::nullopt;
  int y = 0;
  unsigned m = 0, d = 0;
  if (!parse_int(iso.substr(0, 4), y) || !parse_int(iso.substr(5, 2), m) || !parse_int(iso.substr(8, 2), d))
    return std::nullopt;
  const std::chrono::year_month_day ymd{std::chrono::year(y), std::chrono::month(m), std::chrono::day(d)};
  if (!ymd.ok()) return std::nullopt;
  return Date(std::chrono::sys_days(ymd));
}

std::string Date::iso() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", year(), month(), day());
  return buf;
}

int Date::year() const { return int(ymd_of(days_).year()); }
unsigned Date::month() const { return unsigned(ymd_of(days_).month()); }
unsigned Date::day() const { return unsigned(ymd_of(days_).day()); }

unsigned Date::weekday() const {
  // iso_encoding: Monday = 1 ... Sunday = 7
  return std::chrono::weekday(days_).iso_encoding() - 1;
}

}  // namespace volcast
