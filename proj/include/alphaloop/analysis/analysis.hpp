#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/agents/miner.hpp"
#include "alphaloop/agents/regime.hpp"
#include "alphaloop/core/matrix.hpp"
#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/exchange/exchange.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::analysis {

// ---- alpha decay ----

enum class DecayMode { GlobalTopK, PeriodicTopK, AdaptiveLibrary };

std::string_view to_string(DecayMode m);
/// Accepts GLOBAL_TOPK etc. and the lower-case-dash forms. Throws ConfigError.
DecayMode parse_decay_mode(std::string_view s);

struct Period {
  std::size_t first = 0;  // panel rows, inclusive
  std::size_t last = 0;
};

/// Consecutive blocks of `block` rows starting at `first`; a trailing partial
/// block is kept when it has at least two rows.
std::vector<Period> block_periods(std::size_t first, std::size_t last, std::size_t block = 126);

struct DecayRow {
  std::size_t period = 0;
  DecayMode mode = DecayMode::GlobalTopK;
  std::size_t n_factors = 0;
  // over the selected factors' oriented mean IC; missing when none selected
  double mean_ic = kMissing;
  double max_ic = kMissing;
  double min_ic = kMissing;
};

/// Per-factor mean IC (one-day forward returns) by period, computed once and
/// shared by every mode. Factors that cannot be evaluated get missing ICs.
class DecayTable {
 public:
  DecayTable(const PricePanel& panel, const std::vector<dsl::Expr>& candidates,
             std::vector<Period> periods);

  const PricePanel& panel() const { return *panel_; }
  std::size_t num_candidates() const { return n_candidates_; }
  const std::vector<Period>& periods() const { return periods_; }
  const dsl::Expr& factor(std::size_t i) const { return factors_[i]; }
  /// Index of `e`, appending it (outside the candidate set) when absent.
  std::size_t ensure(const dsl::Expr& e);

  /// Mean IC of factor i over signal rows [first, last].
  double mean_ic(std::size_t i, std::size_t first, std::size_t last) const;
  double period_ic(std::size_t i, std::size_t p) const { return by_period_[i][p]; }
  double horizon_ic(std::size_t i) const { return horizon_[i]; }

 private:
  void add(const dsl::Expr& e);

  const PricePanel* panel_;
  std::vector<Period> periods_;
  std::size_t n_candidates_ = 0;
  std::vector<dsl::Expr> factors_;
  std::vector<std::string> printed_;
  std::vector<Matrix> signals_;
  Matrix fwd_;
  std::vector<std::vector<double>> by_period_;
  std::vector<double> horizon_;
};

/// GLOBAL_TOPK picks the k largest |mean IC| over all periods together and
/// orients them by that sign; PERIODIC_TOPK re-picks and re-orients inside
/// each period; ADAPTIVE_LIBRARY uses the effective sets in force during the
/// period (the snapshot current at its start plus any dated inside it),
/// oriented by the IC over the 126 rows before the period. k is clamped to
/// the candidate count. Throws EmptyCandidateSet.
std::vector<DecayRow> alpha_decay(DecayTable& table, DecayMode mode, std::size_t k,
                                  const std::vector<agents::LibrarySnapshot>& snapshots = {});

std::string decay_csv(const std::vector<DecayRow>& rows);

// ---- regime coherence ----

struct CoherenceMatrix {
  agents::Dimension dimension = agents::Dimension::Trend;
  Matrix raw;
  Matrix normalized;
  bool degenerate = false;  // constant raw matrix, normalized to all ones
};

/// Linear min-max over the whole matrix.
Matrix min_max_normalize(const Matrix& m, bool* degenerate = nullptr);

/// raw(i, j) = 1 - |sem_i - mkt_j|. Throws LengthMismatch when sizes differ
/// or fewer than two cycles are given.
CoherenceMatrix coherence_matrix(agents::Dimension dim, const std::vector<double>& semantic,
                                 const std::vector<double>& market);

struct MarketProxy {
  double trend = 0.0;
  double vol = 0.0;
  double corr = 0.0;
};

/// Semantic side uses each label's numeric value.
std::vector<CoherenceMatrix> coherence_matrices(
    const std::vector<agents::RegimeAssessment>& assessments,
    const std::vector<MarketProxy>& proxies);

/// Long form: i,j,raw,normalized.
std::string coherence_csv(const CoherenceMatrix& m);
/// Self-contained heatmap of the normalized matrix.
std::string coherence_svg(const CoherenceMatrix& m);

// ---- exposure vs volatility ----

struct ExposureSample {
  std::size_t row = 0;  // last row of the 10-day window
  double v = 0.0;
  double e = 0.0;
};

struct ExposureFit {
  std::vector<ExposureSample> series;
  std::optional<double> slope;      // OLS of E on V; none when V is constant
  std::optional<double> pearson_r;  // none when either side is constant
};

/// Index bars and net position rates aligned by row. Windows [t-9, t] for
/// t = 9, 19, ... Throws LengthMismatch or InsufficientHistory (< 20 rows).
ExposureFit exposure_volatility(const IndexBars& index, const std::vector<double>& net_position,
                                std::size_t stride = 10);

std::string exposure_csv(const ExposureFit& fit, const std::vector<Date>& days);
std::string exposure_fit_json(const ExposureFit& fit);

// ---- factor diversity ----

struct DiversityTrial {
  std::optional<double> phi_intra;  // none with fewer than two factors
  std::optional<double> phi_inter;  // none when the snapshot is empty
  std::string note;
};

struct DiversityReport {
  std::vector<DiversityTrial> trials;
  std::optional<double> mean_intra;
  std::optional<double> mean_inter;
};

DiversityReport diversity_report(const std::vector<std::vector<dsl::Expr>>& snapshots,
                                 const std::vector<dsl::Expr>& reference);

std::string diversity_json(const DiversityReport& r);

// ---- friction ----

struct FrictionDay {
  Date day;
  double turnover = 0.0;
  std::size_t n_trades = 0;
  double slippage_bound = 0.0;
};

struct FrictionReport {
  std::vector<FrictionDay> days;
  double max_turnover = 0.0;
  std::vector<Date> exceeding;  // turnover above 1.0
};

/// Slippage standard deviation bound 0.2% * tau / sqrt(N); 0 when N = 0.
double slippage_bound(double turnover, std::size_t n_trades);

/// One row per curve day after the first: filled notional that day divided by
/// the previous curve value. Throws MissingNav for a fill on a day that has no
/// previous curve value.
FrictionReport friction_report(const std::vector<exchange::TradeRecord>& trades,
                               const std::vector<Date>& curve_days,
                               const std::vector<double>& curve);

std::string friction_csv(const FrictionReport& r);

}  // namespace alphaloop::analysis
