#include "alphaloop/panel/calendar.hpp"

#include <algorithm>

#include "alphaloop/core/error.hpp"

namespace alphaloop {

int days_per_year(MarketId market) { return market == MarketId::CsiLike ? 243 : 252; }

std::string_view profile_name(MarketId market) {
  return market == MarketId::CsiLike ? "csi" : "us";
}

MarketId parse_market(std::string_view profile) {
  if (profile == "csi" || profile == "CSI_LIKE") return MarketId::CsiLike;
  if (profile == "us" || profile == "US_LIKE") return MarketId::UsLike;
  throw Error(ErrorCode::ConfigError, "unknown market profile '" + std::string(profile) + "'");
}

TradingCalendar::TradingCalendar(MarketId market, std::vector<Date> days)
    : market_(market), days_(std::move(days)) {
  for (std::size_t i = 1; i < days_.size(); ++i) {
    if (!(days_[i - 1] < days_[i])) {
      throw Error(ErrorCode::DateOutOfRange,
                  "calendar days must be strictly increasing at " + days_[i].to_string());
    }
  }
}

std::optional<std::size_t> TradingCalendar::index_of(Date d) const {
  const auto it = std::lower_bound(days_.begin(), days_.end(), d);
  if (it == days_.end() || *it != d) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin());
}

std::size_t TradingCalendar::lower_bound(Date d) const {
  return static_cast<std::size_t>(std::lower_bound(days_.begin(), days_.end(), d) -
                                  days_.begin());
}

std::optional<std::size_t> TradingCalendar::last_at_or_before(Date d) const {
  const auto it = std::upper_bound(days_.begin(), days_.end(), d);
  if (it == days_.begin()) return std::nullopt;
  return static_cast<std::size_t>(it - days_.begin()) - 1;
}

std::vector<Date> weekday_calendar(Date start, std::size_t count) {
  std::vector<Date> days;
  days.reserve(count);
  Date d = start;
  while (days.size() < count) {
    if (d.weekday() < 5) days.push_back(d);
    d = d + 1;
  }
  return days;
}

}  // namespace alphaloop
