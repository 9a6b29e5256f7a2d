#include <algorithm>
#include <cmath>
#include <map>

#include "alphaloop/analysis/analysis.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"

namespace alphaloop::analysis {

double slippage_bound(double turnover, std::size_t n_trades) {
  if (n_trades == 0) return 0.0;
  return 0.002 * turnover / std::sqrt(static_cast<double>(n_trades));
}

FrictionReport friction_report(const std::vector<exchange::TradeRecord>& trades,
                               const std::vector<Date>& curve_days,
                               const std::vector<double>& curve) {
  if (curve_days.size() != curve.size()) {
    throw Error(ErrorCode::LengthMismatch, "friction: curve days and values differ in length");
  }
  std::map<Date, std::size_t> row_of;
  for (std::size_t i = 0; i < curve_days.size(); ++i) row_of[curve_days[i]] = i;
  std::vector<double> notional(curve.size(), 0.0);
  std::vector<std::size_t> fills(curve.size(), 0);
  for (const auto& t : trades) {
    if (t.status != exchange::OrderStatus::Filled) continue;
    const auto it = row_of.find(t.day);
    if (it == row_of.end() || it->second == 0) {
      throw Error(ErrorCode::MissingNav, "friction: no prior NAV for fill on " + t.day.to_string());
    }
    notional[it->second] += std::abs(static_cast<double>(t.qty) * t.price);
    ++fills[it->second];
  }
  FrictionReport r;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (!(curve[i - 1] > 0.0)) {
      if (fills[i] == 0) {
        r.days.push_back({curve_days[i], 0.0, 0, 0.0});
        continue;
      }
      throw Error(ErrorCode::MissingNav, "friction: non-positive NAV before " + curve_days[i].to_string());
    }
    FrictionDay d;
    d.day = curve_days[i];
    d.turnover = notional[i] / curve[i - 1];
    d.n_trades = fills[i];
    d.slippage_bound = slippage_bound(d.turnover, d.n_trades);
    r.max_turnover = std::max(r.max_turnover, d.turnover);
    if (d.turnover > 1.0) r.exceeding.push_back(d.day);
    r.days.push_back(d);
  }
  return r;
}

std::string friction_csv(const FrictionReport& r) {
  std::string out = "day,turnover,n_trades,slippage_bound\n";
  for (const auto& d : r.days) {
    out += d.day.to_string() + "," + io::format_double(d.turnover) + "," +
           std::to_string(d.n_trades) + "," + io::format_double(d.slippage_bound) + "\n";
  }
  return out;
}

}  // namespace alphaloop::analysis
