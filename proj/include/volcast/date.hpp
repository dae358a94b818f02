#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace volcast {

/// Calendar day. Stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Strict `YYYY-MM-DD`; nullopt on anything else, including invalid days.
  static std::optional<Date> parse(std::string_view iso);

  std::string iso() const;
  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// Monday = 0 ... Sunday = 6.
  unsigned weekday() const;
  bool is_weekend() const { return weekday() >= 5; }

  long serial() const { return days_.time_since_epoch().count(); }
  std::chrono::sys_days sys_days() const { return days_; }

  Date operator+(int days) const { return Date(days_ + std::chrono::days(days)); }
  Date operator-(int days) const { return Date(days_ - std::chrono::days(days)); }
  long operator-(const Date& other) const { return serial() - other.serial(); }

  friend auto operator<=>(const Date&, const Date&) = default;

 private:
  std::chrono::sys_days days_{};
};

/// Inclusive date range.
struct DateRange {
  Date first;
  Date last;

  bool contains(const Date& d) const { return first <= d && d <= last; }
};

}  // namespace volcast
