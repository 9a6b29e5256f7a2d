#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "alphaloop/agents/memory.hpp"
#include "alphaloop/agents/policy.hpp"
#include "alphaloop/agents/regime.hpp"
#include "alphaloop/agents/signals.hpp"
#include "alphaloop/lab/library.hpp"
#include "alphaloop/strategy/reference.hpp"

namespace alphaloop::agents {

struct ScreenerConfig {
  int min_factors = 3;
  int k = 5;
  double corr_threshold = 0.7;
  int icir_window = 60;
  int corr_window = 60;
  strategy::TransformHint hint = strategy::TransformHint::Zscore;
};

/// 1.25 when the category suits the regime, 0.75 when it suits the opposite
/// regime, 1.0 otherwise.
double regime_multiplier(lab::Category c, const RegimeAssessment& r);

struct RecentIc {
  double mean_ic = 0.0;
  double ic_std = 0.0;
  double icir = 0.0;
  int days = 0;
};

/// IC of signal rows [row - window, row - 1] against next-day returns, so the
/// latest close used is that of `row`. nullopt when no day is measurable.
std::optional<RecentIc> recent_ic(const Matrix& signal, const Matrix& fwd1, std::size_t row,
                                  int window);

/// |mean over days of cross-sectional Pearson| on rows [row - window + 1, row];
/// 0 when no day is measurable.
double signal_correlation(const Matrix& a, const Matrix& b, std::size_t row, int window);

struct ScoredFactor {
  std::string factor_id;
  lab::Category category = lab::Category::Other;
  RecentIc ic;
  double multiplier = 1.0;
  double suitability = 0.0;
};

/// Greedy pass over `ranked` (best first): admit while |corr| with every
/// admitted factor stays below the threshold, up to k; weights proportional
/// to suitability (equal when all are zero), direction = sign of recent IC.
std::vector<strategy::EnsembleEntry> build_ensemble(
    const std::vector<ScoredFactor>& ranked,
    const std::function<double(const std::string&, const std::string&)>& corr,
    const ScreenerConfig& cfg);

/// Suitability descending, ties by factor id.
void rank_factors(std::vector<ScoredFactor>& scored);

struct ScreenResult {
  bool skipped = false;
  std::vector<strategy::EnsembleEntry> ensemble;
  std::vector<ScoredFactor> ranked;
};

class Screener {
 public:
  Screener(const PricePanel& panel, ScreenerConfig cfg);

  /// Decision at `row`; reads closes up to `row` only.
  ScreenResult cycle(const lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                     std::size_t row, const std::optional<RegimeAssessment>& regime,
                     PolicyBackend* policy = nullptr) const;

  const ScreenerConfig& config() const { return cfg_; }
  const Matrix& forward_returns() const { return fwd1_; }

 private:
  std::optional<std::vector<strategy::EnsembleEntry>> external(
      PolicyBackend& policy, const std::vector<ScoredFactor>& ranked,
      const lab::FactorLibrary& lib, std::size_t row,
      const std::optional<RegimeAssessment>& regime) const;

  const PricePanel* panel_;
  ScreenerConfig cfg_;
  Matrix fwd1_;
};

nlohmann::ordered_json to_json(const strategy::EnsembleEntry& e);
nlohmann::ordered_json ensemble_json(const std::vector<strategy::EnsembleEntry>& ensemble);

}  // namespace alphaloop::agents
