#pragma once

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace alphaloop {

/// Calendar date stored as days since 1970-01-01.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(int serial) : serial_(serial) {}

  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Accepts strict ISO-8601 `YYYY-MM-DD`.
  static std::optional<Date> parse(std::string_view text);

  constexpr int serial() const { return serial_; }
  int weekday() const;  // 0 = Monday .. 6 = Sunday
  std::string to_string() const;

  constexpr Date operator+(int days) const { return Date(serial_ + days); }
  constexpr auto operator<=>(const Date&) const = default;

 private:
  int serial_ = 0;
};

/// Inclusive date range.
struct DateRange {
  Date start;
  Date end;

  bool contains(Date d) const { return start <= d && d <= end; }
  friend bool operator==(const DateRange&, const DateRange&) = default;
};

}  // namespace alphaloop
