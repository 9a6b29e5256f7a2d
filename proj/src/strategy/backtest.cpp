#include "alphaloop/strategy/backtest.hpp"

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"

namespace alphaloop::strategy {

std::vector<DayBars> build_day_bars(const PricePanel& panel) {
  std::vector<DayBars> out(panel.num_days());
  exchange::PriceMap marks;
  for (std::size_t t = 0; t < panel.num_days(); ++t) {
    for (std::size_t i = 0; i < panel.num_assets(); ++i) {
      const double c = panel.close()(t, i);
      if (is_missing(c)) continue;
      out[t].closes.emplace(panel.assets()[i], c);
      marks[panel.assets()[i]] = c;
    }
    out[t].marks = marks;
  }
  return out;
}

std::string target_dump_csv(const std::vector<TargetRow>& rows) {
  std::string out = "day,asset,score,target_qty\n";
  for (const auto& r : rows) {
    out += r.day.to_string() + "," + r.asset + "," + io::format_double(r.score) + "," +
           std::to_string(r.target_qty) + "\n";
  }
  return out;
}

DayDecision rebalance_day(exchange::Exchange& ex, const std::vector<AssetScore>& scores,
                          const Theta& theta, const exchange::PriceMap& decision_marks,
                          Date decision_day) {
  DayDecision d;
  const int n_short = theta.gamma < 1.0 ? theta.n_short : 0;
  if (scores.size() < static_cast<std::size_t>(theta.n_long + n_short)) return d;
  const Selection sel = select(scores, theta.n_long, n_short);
  const double nav = ex.nav(decision_marks);
  if (!(nav > 0.0)) return d;
  const auto targets = target_holdings(sel, nav, theta, decision_marks, ex.profile());
  std::map<std::string, double> score_of;
  for (const auto& s : scores) score_of.emplace(s.asset, s.score);
  for (const auto& [a, q] : targets) d.targets.push_back({decision_day, a, score_of.at(a), q});
  for (const auto& req : rebalance_orders(ex.account(), targets)) {
    const auto it = decision_marks.find(req.asset);
    const double ref = it == decision_marks.end() ? 0.0 : it->second;
    d.submissions.push_back(ex.submit_order(req, ref));
  }
  d.traded = true;
  return d;
}

namespace detail {

void record_day(const exchange::Exchange& ex, const DayBars& bars, Date day,
                const BacktestOptions& opts, BacktestResult& out) {
  const double nav = ex.nav(bars.marks);
  out.days.push_back(day);
  out.nav.push_back(nav);
  out.net_position_rate.push_back(nav > 0.0 ? ex.net_position_rate(bars.marks) : kMissing);
  if (opts.record_snapshots) out.snapshots.push_back(ex.snapshot_json(bars.marks));
}

void check_range(const PricePanel& panel, std::size_t first, std::size_t last) {
  if (first < 1 || first > last || last >= panel.num_days()) {
    throw Error(ErrorCode::DateOutOfRange, "backtest rows must satisfy 1 <= first <= last < days");
  }
}

}  // namespace detail

BacktestResult run_backtest(const PricePanel& panel, const std::vector<DayBars>& bars,
                            const std::vector<EnsembleEntry>& ensemble,
                            const std::map<std::string, const Matrix*>& signals,
                            const Theta& theta, const exchange::MarketProfile& profile,
                            std::size_t first, std::size_t last, const BacktestOptions& opts) {
  if (ensemble.empty()) throw Error(ErrorCode::EmptyEnsemble, "backtest needs a non-empty ensemble");
  return run_backtest(
      panel, bars,
      [&](std::size_t row) { return composite_scores(ensemble, signals, row, panel.assets()); },
      theta, profile, first, last, opts);
}

}  // namespace alphaloop::strategy
