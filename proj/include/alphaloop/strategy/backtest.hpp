#pragma once

#include <map>
#include <string>
#include <vector>

#include "alphaloop/exchange/exchange.hpp"
#include "alphaloop/panel/panel.hpp"
#include "alphaloop/strategy/reference.hpp"

namespace alphaloop::strategy {

/// Per-day prices: `closes` holds only real bars (fills), `marks` carries the
/// last known close forward (valuation).
struct DayBars {
  exchange::PriceMap closes;
  exchange::PriceMap marks;
};

std::vector<DayBars> build_day_bars(const PricePanel& panel);

struct TargetRow {
  Date day;
  std::string asset;
  double score;
  long long target_qty;
};

std::string target_dump_csv(const std::vector<TargetRow>& rows);

struct DayDecision {
  bool traded = false;  // false when too few assets could be scored
  std::vector<TargetRow> targets;
  std::vector<exchange::SubmitResult> submissions;
};

/// Sizes the book at `decision_day` prices and submits the rebalance orders
/// to `ex` (already at the execution day). `scores` come from the decision day.
DayDecision rebalance_day(exchange::Exchange& ex, const std::vector<AssetScore>& scores,
                          const Theta& theta, const exchange::PriceMap& decision_marks,
                          Date decision_day);

struct BacktestResult {
  std::vector<Date> days;
  std::vector<double> nav;                // after each day's settlement
  std::vector<double> net_position_rate;  // missing when NAV <= 0
  std::vector<exchange::TradeRecord> trades;
  std::vector<std::string> snapshots;     // one JSON line per day
  std::vector<TargetRow> targets;
};

struct BacktestOptions {
  double initial_cash = 10'000'000.0;
  bool record_snapshots = false;
  bool record_targets = false;
};

/// Runs the reference strategy over rows [first, last]. The decision for row t
/// uses signals and closes of row t - 1 and fills at the close of t, so
/// first >= 1. Scores per decision row come from `scores_for(row)`.
template <typename ScoreFn>
BacktestResult run_backtest(const PricePanel& panel, const std::vector<DayBars>& bars,
                            ScoreFn&& scores_for, const Theta& theta,
                            const exchange::MarketProfile& profile, std::size_t first,
                            std::size_t last, const BacktestOptions& opts = {});

/// Convenience form that scores from an ensemble and its signals.
BacktestResult run_backtest(const PricePanel& panel, const std::vector<DayBars>& bars,
                            const std::vector<EnsembleEntry>& ensemble,
                            const std::map<std::string, const Matrix*>& signals,
                            const Theta& theta, const exchange::MarketProfile& profile,
                            std::size_t first, std::size_t last, const BacktestOptions& opts = {});

// ---- implementation ----

namespace detail {
void record_day(const exchange::Exchange& ex, const DayBars& bars, Date day,
                const BacktestOptions& opts, BacktestResult& out);
void check_range(const PricePanel& panel, std::size_t first, std::size_t last);
}  // namespace detail

template <typename ScoreFn>
BacktestResult run_backtest(const PricePanel& panel, const std::vector<DayBars>& bars,
                            ScoreFn&& scores_for, const Theta& theta,
                            const exchange::MarketProfile& profile, std::size_t first,
                            std::size_t last, const BacktestOptions& opts) {
  detail::check_range(panel, first, last);
  validate_theta(theta, profile);
  exchange::Exchange ex(profile, opts.initial_cash);
  BacktestResult out;
  for (std::size_t t = first; t <= last; ++t) {
    const Date day = panel.calendar()[t];
    ex.begin_day(day);
    const std::vector<AssetScore> scores = scores_for(t - 1);
    DayDecision d = rebalance_day(ex, scores, theta, bars[t - 1].marks, panel.calendar()[t - 1]);
    if (opts.record_targets) {
      out.targets.insert(out.targets.end(), d.targets.begin(), d.targets.end());
    }
    ex.settle_day(bars[t].closes);
    detail::record_day(ex, bars[t], day, opts, out);
  }
  out.trades = ex.trade_log();
  return out;
}

}  // namespace alphaloop::strategy
