#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/date.hpp"

namespace alphaloop {

enum class MarketId { CsiLike, UsLike };

/// Trading days per calendar year used for annualisation.
int days_per_year(MarketId market);
std::string_view profile_name(MarketId market);
/// "csi" or "us".
MarketId parse_market(std::string_view profile);

class TradingCalendar {
 public:
  TradingCalendar() = default;
  /// Throws DateOutOfRange unless days are strictly increasing.
  TradingCalendar(MarketId market, std::vector<Date> days);

  MarketId market() const { return market_; }
  int days_per_year() const { return alphaloop::days_per_year(market_); }
  const std::vector<Date>& days() const { return days_; }
  std::size_t size() const { return days_.size(); }
  bool empty() const { return days_.empty(); }
  Date operator[](std::size_t i) const { return days_[i]; }
  Date front() const { return days_.front(); }
  Date back() const { return days_.back(); }

  std::optional<std::size_t> index_of(Date d) const;
  /// First index whose date is >= d.
  std::size_t lower_bound(Date d) const;
  /// Last index whose date is <= d; nullopt when d precedes the calendar.
  std::optional<std::size_t> last_at_or_before(Date d) const;

  friend bool operator==(const TradingCalendar&, const TradingCalendar&) = default;

 private:
  MarketId market_ = MarketId::UsLike;
  std::vector<Date> days_;
};

/// Weekday calendar of `count` days starting at the first weekday >= start.
std::vector<Date> weekday_calendar(Date start, std::size_t count);

}  // namespace alphaloop
