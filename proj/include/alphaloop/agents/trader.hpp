#pragma once

#include <optional>
#include <vector>

#include "alphaloop/agents/memory.hpp"
#include "alphaloop/agents/policy.hpp"
#include "alphaloop/agents/regime.hpp"
#include "alphaloop/exchange/exchange.hpp"
#include "alphaloop/strategy/backtest.hpp"

namespace alphaloop::agents {

struct TraderConfig {
  std::vector<int> n_long = {5, 10, 20};
  std::vector<int> n_short = {0, 5, 10};
  double beta = 0.8;
  std::optional<double> gamma;  // profile default when unset
  int lookback = 120;
  double lambda = 0.5;
  /// Multiplies beta on days whose vol label is at least `high_vol_level`.
  double high_vol_exposure_scale = 1.0;
  int high_vol_level = 4;
};

/// 1 on long-only profiles, 0.5 otherwise.
double default_gamma(const exchange::MarketProfile& profile);
double effective_gamma(const TraderConfig& cfg, const exchange::MarketProfile& profile);

/// Candidate thetas in lexicographic order. With gamma = 1 only n_short = 0 is kept.
std::vector<strategy::Theta> theta_grid(const TraderConfig& cfg,
                                        const exchange::MarketProfile& profile);

/// (10, 10 if gamma < 1 else 0, 0.8, gamma).
strategy::Theta fixed_theta(const exchange::MarketProfile& profile, double gamma);

bool theta_less(const strategy::Theta& a, const strategy::Theta& b);
nlohmann::ordered_json to_json(const strategy::Theta& t);

struct CandidateScore {
  strategy::Theta theta;
  double objective = 0.0;
  std::optional<double> sharpe;
  double mdd = 0.0;
};

/// J = SR + lambda * MDD over a NAV curve whose first value is the start
/// capital; an undefined or unmeasurable SR counts as 0.
CandidateScore score_curve(const strategy::Theta& theta, const std::vector<double>& nav,
                           int days_per_year, double rf_annual, double lambda);

struct TraderResult {
  bool skipped = false;
  strategy::Theta theta;     // the searched or fixed choice
  strategy::Theta executed;  // after the high-vol exposure scale
  std::vector<CandidateScore> candidates;
  strategy::DayDecision decision;
};

/// Per-row composite scores for one ensemble, computed on demand.
class ScoreBook {
 public:
  ScoreBook(const PricePanel& panel, std::vector<strategy::EnsembleEntry> ensemble,
            std::map<std::string, const Matrix*> signals);
  const std::vector<strategy::AssetScore>& at(std::size_t row);
  const std::vector<strategy::EnsembleEntry>& ensemble() const { return ensemble_; }

 private:
  const PricePanel* panel_;
  std::vector<strategy::EnsembleEntry> ensemble_;
  std::map<std::string, const Matrix*> signals_;
  std::map<std::size_t, std::vector<strategy::AssetScore>> rows_;
};

class Trader {
 public:
  Trader(const PricePanel& panel, const std::vector<strategy::DayBars>& bars,
         exchange::MarketProfile profile, TraderConfig cfg, double initial_capital);

  /// Decision at row `row` on `ex` (already at the execution day row + 1).
  /// With `search` false the fixed theta is used and no search events are written.
  TraderResult cycle(ScoreBook* book, const std::optional<RegimeAssessment>& regime,
                     exchange::Exchange& ex, MemoryStore& memory, std::size_t row, bool search,
                     PolicyBackend* policy = nullptr) const;

  const std::vector<strategy::Theta>& grid() const { return grid_; }
  const TraderConfig& config() const { return cfg_; }
  double gamma() const { return gamma_; }
  /// Lookback backtests of every grid theta for a decision at `row`.
  std::vector<CandidateScore> evaluate_grid(ScoreBook& book, std::size_t row) const;

 private:
  const PricePanel* panel_;
  const std::vector<strategy::DayBars>* bars_;
  exchange::MarketProfile profile_;
  TraderConfig cfg_;
  double initial_capital_;
  double gamma_;
  std::vector<strategy::Theta> grid_;
};

}  // namespace alphaloop::agents
