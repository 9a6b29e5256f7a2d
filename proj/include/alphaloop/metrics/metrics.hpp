#pragma once

#include <optional>
#include <string>
#include <vector>

#include "alphaloop/core/date.hpp"
#include "alphaloop/panel/calendar.hpp"
#include "json.hpp"

namespace alphaloop::metrics {

struct EquityCurve {
  std::vector<Date> days;
  std::vector<double> values;
  MarketId market = MarketId::UsLike;
  int days_per_year = 252;
  double rf_annual = 0.0;

  /// Number of daily returns (values.size() - 1).
  std::size_t periods() const { return values.empty() ? 0 : values.size() - 1; }
};

/// Throws CurveTooShort on an empty curve and DateOutOfRange / NonPositiveNav
/// when the invariants on days and V_0 do not hold.
void validate_curve(const EquityCurve& curve);

struct AnnualReturn {
  double value = 0.0;
  bool ruined = false;
};

/// Needs at least one return. A curve ending at or below zero reports -1 with ruined set.
AnnualReturn annualized_return(const EquityCurve& curve);

std::vector<double> daily_returns(const std::vector<double>& values);

/// nullopt when the return series has zero sample std. Needs at least two returns.
std::optional<double> sharpe(const EquityCurve& curve);
/// Throwing variant: ZeroVolatility instead of nullopt.
double sharpe_or_throw(const EquityCurve& curve);

double max_drawdown(const std::vector<double>& values);

struct MetricsReport {
  double ar = 0.0;
  bool ruined = false;
  std::optional<double> sr;
  double mdd = 0.0;
  std::size_t days = 0;
  std::string profile;
};

MetricsReport compute(const EquityCurve& curve);
nlohmann::ordered_json to_json(const MetricsReport& r);

}  // namespace alphaloop::metrics
