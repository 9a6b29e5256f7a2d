#include "alphaloop/agents/trader.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

#include "alphaloop/core/error.hpp"
#include "alphaloop/metrics/metrics.hpp"

namespace alphaloop::agents {

double default_gamma(const exchange::MarketProfile& profile) {
  return profile.allow_short ? 0.5 : 1.0;
}

double effective_gamma(const TraderConfig& cfg, const exchange::MarketProfile& profile) {
  return cfg.gamma.value_or(default_gamma(profile));
}

bool theta_less(const strategy::Theta& a, const strategy::Theta& b) {
  return std::tie(a.n_long, a.n_short, a.beta, a.gamma) <
         std::tie(b.n_long, b.n_short, b.beta, b.gamma);
}

std::vector<strategy::Theta> theta_grid(const TraderConfig& cfg,
                                        const exchange::MarketProfile& profile) {
  const double gamma = effective_gamma(cfg, profile);
  std::vector<strategy::Theta> grid;
  for (int nl : cfg.n_long) {
    for (int ns : cfg.n_short) {
      if (ns != 0 && (gamma >= 1.0 || !profile.allow_short)) continue;
      const strategy::Theta t{nl, ns, cfg.beta, gamma};
      strategy::validate_theta(t, profile);
      if (std::find(grid.begin(), grid.end(), t) == grid.end()) grid.push_back(t);
    }
  }
  if (grid.empty()) throw Error(ErrorCode::InvalidTheta, "theta grid is empty");
  std::sort(grid.begin(), grid.end(), theta_less);
  return grid;
}

strategy::Theta fixed_theta(const exchange::MarketProfile& profile, double gamma) {
  return strategy::Theta{10, gamma < 1.0 && profile.allow_short ? 10 : 0, 0.8, gamma};
}

nlohmann::ordered_json to_json(const strategy::Theta& t) {
  nlohmann::ordered_json j;
  j["n_long"] = t.n_long;
  j["n_short"] = t.n_short;
  j["beta"] = t.beta;
  j["gamma"] = t.gamma;
  return j;
}

CandidateScore score_curve(const strategy::Theta& theta, const std::vector<double>& nav,
                           int days_per_year, double rf_annual, double lambda) {
  CandidateScore s;
  s.theta = theta;
  s.mdd = metrics::max_drawdown(nav);
  if (nav.size() >= 3 && nav.front() > 0.0) {
    metrics::EquityCurve c;
    c.values = nav;
    c.days_per_year = days_per_year;
    c.rf_annual = rf_annual;
    s.sharpe = metrics::sharpe(c);
  }
  s.objective = s.sharpe.value_or(0.0) + lambda * s.mdd;
  return s;
}

ScoreBook::ScoreBook(const PricePanel& panel, std::vector<strategy::EnsembleEntry> ensemble,
                     std::map<std::string, const Matrix*> signals)
    : panel_(&panel), ensemble_(std::move(ensemble)), signals_(std::move(signals)) {}

const std::vector<strategy::AssetScore>& ScoreBook::at(std::size_t row) {
  auto it = rows_.find(row);
  if (it == rows_.end()) {
    it = rows_.emplace(row, strategy::composite_scores(ensemble_, signals_, row, panel_->assets())).first;
  }
  return it->second;
}

Trader::Trader(const PricePanel& panel, const std::vector<strategy::DayBars>& bars,
               exchange::MarketProfile profile, TraderConfig cfg, double initial_capital)
    : panel_(&panel),
      bars_(&bars),
      profile_(profile),
      cfg_(std::move(cfg)),
      initial_capital_(initial_capital),
      gamma_(effective_gamma(cfg_, profile_)),
      grid_(theta_grid(cfg_, profile_)) {}

std::vector<CandidateScore> Trader::evaluate_grid(ScoreBook& book, std::size_t row) const {
  std::vector<CandidateScore> out;
  const std::size_t lookback = static_cast<std::size_t>(std::max(cfg_.lookback, 1));
  const std::size_t first = row + 1 > lookback ? row + 1 - lookback : 1;
  for (const auto& theta : grid_) {
    std::vector<double> nav{initial_capital_};
    if (row >= 1 && first <= row) {
      strategy::BacktestOptions opts;
      opts.initial_cash = initial_capital_;
      const auto bt = strategy::run_backtest(
          *panel_, *bars_, [&](std::size_t r) { return book.at(r); }, theta, profile_, first, row,
          opts);
      nav.insert(nav.end(), bt.nav.begin(), bt.nav.end());
    }
    out.push_back(score_curve(theta, nav, profile_.days_per_year, profile_.rf_annual, cfg_.lambda));
  }
  return out;
}

TraderResult Trader::cycle(ScoreBook* book, const std::optional<RegimeAssessment>& regime,
                           exchange::Exchange& ex, MemoryStore& memory, std::size_t row,
                           bool search, PolicyBackend* policy) const {
  TraderResult out;
  const Date day = panel_->calendar()[row];
  if (!book || book->ensemble().empty()) {
    out.skipped = true;
    memory.append({day, "trader", "skip", Meta::EmptyEnsembleSkipped, {{"r_t", 0.0}}});
    return out;
  }

  out.theta = fixed_theta(profile_, gamma_);
  if (search) {
    out.candidates = evaluate_grid(*book, row);
    std::optional<double> best;
    for (const auto& c : out.candidates) {
      const bool improved = !best || c.objective > *best;
      nlohmann::ordered_json payload;
      payload["theta"] = to_json(c.theta);
      payload["objective"] = c.objective;
      payload["sr"] = c.sharpe ? nlohmann::ordered_json(*c.sharpe) : nlohmann::ordered_json(nullptr);
      payload["mdd"] = c.mdd;
      memory.append({day, "trader", "search", improved ? Meta::Improved : Meta::Rejected, payload});
      if (improved) {
        best = c.objective;
        out.theta = c.theta;
      }
    }
    if (policy && policy->kind() == PolicyKind::External) {
      nlohmann::json inputs;
      inputs["day"] = day.to_string();
      inputs["default"] = nlohmann::json::parse(to_json(out.theta).dump());
      inputs["candidates"] = nlohmann::json::array();
      for (const auto& c : out.candidates) {
        inputs["candidates"].push_back(
            {{"theta", nlohmann::json::parse(to_json(c.theta).dump())}, {"objective", c.objective}});
      }
      if (const auto reply = policy->query("trader", inputs)) {
        try {
          const auto& t = reply->at("theta");
          const strategy::Theta th{t.at("n_long").get<int>(), t.at("n_short").get<int>(),
                                   t.at("beta").get<double>(), t.at("gamma").get<double>()};
          strategy::validate_theta(th, profile_);
          out.theta = th;
        } catch (const std::exception& e) {
          spdlog::warn("external trader response rejected ({}), keeping the searched theta",
                       e.what());
        }
      }
    }
  }

  out.executed = out.theta;
  if (search && regime && regime->vol_level >= cfg_.high_vol_level) {
    out.executed.beta = std::clamp(out.theta.beta * cfg_.high_vol_exposure_scale, 1e-9, 1.0);
  }
  out.decision = strategy::rebalance_day(ex, book->at(row), out.executed, (*bars_)[row].marks, day);
  for (const auto& s : out.decision.submissions) {
    if (s.ok()) continue;
    nlohmann::ordered_json payload;
    payload["error"] = std::string(to_string(*s.error));
    payload["message"] = s.message;
    memory.append({day, "trader", "order_error", std::nullopt, payload});
  }
  return out;
}

}  // namespace alphaloop::agents
