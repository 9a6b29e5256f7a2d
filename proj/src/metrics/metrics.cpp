#include "alphaloop/metrics/metrics.hpp"

#include <cmath>
#include <limits>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/stats.hpp"

namespace alphaloop::metrics {

void validate_curve(const EquityCurve& curve) {
  if (curve.values.empty()) throw Error(ErrorCode::CurveTooShort, "equity curve is empty");
  if (!curve.days.empty()) {
    if (curve.days.size() != curve.values.size()) {
      throw Error(ErrorCode::LengthMismatch, "equity curve days and values differ in length");
    }
    for (std::size_t i = 1; i < curve.days.size(); ++i) {
      if (!(curve.days[i - 1] < curve.days[i])) {
        throw Error(ErrorCode::DateOutOfRange, "equity curve days must be strictly increasing");
      }
    }
  }
  if (!(curve.values.front() > 0.0)) {
    throw Error(ErrorCode::NonPositiveNav, "equity curve must start above zero");
  }
}

AnnualReturn annualized_return(const EquityCurve& curve) {
  validate_curve(curve);
  const std::size_t t = curve.periods();
  if (t < 1) throw Error(ErrorCode::CurveTooShort, "annualized return needs at least one return");
  const double v0 = curve.values.front();
  const double vt = curve.values.back();
  if (vt <= 0.0) return {-1.0, true};
  const double total = (vt - v0) / v0;
  const double exponent = static_cast<double>(curve.days_per_year) / static_cast<double>(t);
  return {std::pow(1.0 + total, exponent) - 1.0, false};
}

std::vector<double> daily_returns(const std::vector<double>& values) {
  std::vector<double> r;
  if (values.size() < 2) return r;
  r.reserve(values.size() - 1);
  for (std::size_t i = 1; i < values.size(); ++i) r.push_back(values[i] / values[i - 1] - 1.0);
  return r;
}

std::optional<double> sharpe(const EquityCurve& curve) {
  validate_curve(curve);
  if (curve.periods() < 2) throw Error(ErrorCode::CurveTooShort, "sharpe needs at least two returns");
  const auto r = daily_returns(curve.values);
  const double sd = stats::sample_std(r);
  if (!(sd > 0.0) || !std::isfinite(sd)) return std::nullopt;
  const double d = static_cast<double>(curve.days_per_year);
  return std::sqrt(d) * (stats::mean(r) - curve.rf_annual / d) / sd;
}

double sharpe_or_throw(const EquityCurve& curve) {
  const auto s = sharpe(curve);
  if (!s) throw Error(ErrorCode::ZeroVolatility, "daily returns have zero volatility");
  return *s;
}

double max_drawdown(const std::vector<double>& values) {
  double peak = -std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const double v : values) {
    if (v > peak) peak = v;
    if (peak > 0.0) worst = std::min(worst, (v - peak) / peak);
  }
  return worst;
}

MetricsReport compute(const EquityCurve& curve) {
  MetricsReport r;
  const auto ar = annualized_return(curve);
  r.ar = ar.value;
  r.ruined = ar.ruined;
  if (curve.periods() >= 2) r.sr = sharpe(curve);
  r.mdd = max_drawdown(curve.values);
  r.days = curve.periods();
  r.profile = std::string(profile_name(curve.market));
  return r;
}

nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["ar"] = r.ar;
  j["sr"] = r.sr ? nlohmann::ordered_json(*r.sr) : nlohmann::ordered_json(nullptr);
  j["mdd"] = r.mdd;
  j["days"] = r.days;
  j["profile"] = r.profile;
  if (r.ruined) j["ruined"] = true;
  return j;
}

}  // namespace alphaloop::metrics
