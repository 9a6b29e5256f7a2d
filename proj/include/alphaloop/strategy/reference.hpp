#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/matrix.hpp"
#include "alphaloop/exchange/exchange.hpp"

namespace alphaloop::strategy {

enum class TransformHint { None, Rank, Zscore, Winsorize };

std::string_view to_string(TransformHint h);
std::optional<TransformHint> parse_hint(std::string_view s);

/// Winsorize hint clips at these cross-sectional quantiles.
inline constexpr double kWinsorizeHintP = 0.05;

struct EnsembleEntry {
  std::string factor_id;
  double weight = 1.0;
  int direction = 1;  // +1 or -1
  TransformHint hint = TransformHint::None;
};

struct Theta {
  int n_long = 10;
  int n_short = 0;
  double beta = 0.8;
  double gamma = 1.0;

  friend bool operator==(const Theta&, const Theta&) = default;
};

/// Throws InvalidTheta: n_long >= 1, n_short >= 0, beta in (0,1],
/// gamma in [-1,1], gamma == 1 on profiles without shorting.
void validate_theta(const Theta& theta, const exchange::MarketProfile& profile);

struct AssetScore {
  std::string asset;
  double score;
};

/// Signals are full day x asset matrices keyed by factor id, columns aligned
/// with `assets`. Assets missing any factor value on `day` are left out.
/// Throws EmptyEnsemble.
std::vector<AssetScore> composite_scores(const std::vector<EnsembleEntry>& ensemble,
                                         const std::map<std::string, const Matrix*>& signals,
                                         std::size_t day, const std::vector<std::string>& assets);

struct Selection {
  std::vector<std::string> longs;   // best first
  std::vector<std::string> shorts;  // worst last
};

/// Sorts descending with ties by ascending asset id. Throws UniverseTooSmall.
Selection select(std::vector<AssetScore> scores, int n_long, int n_short);

struct ExposureBudget {
  double v_long;
  double v_short;
};

/// V_long = beta * nav * (1 + gamma) / 2, V_short = beta * nav * (1 - gamma) / 2.
ExposureBudget exposure_budget(double nav, const Theta& theta);

long long floor_to_lot(double qty, long long lot);

/// Signed share targets; zero-quantity targets are omitted. Throws MissingPrice.
std::map<std::string, long long> target_holdings(const Selection& sel, double nav,
                                                 const Theta& theta,
                                                 const exchange::PriceMap& prices,
                                                 const exchange::MarketProfile& profile);

/// Phase 1 closes holdings outside `targets`; phase 2 trades the remaining
/// deltas. A sign flip becomes SELL + SHORT or COVER + BUY.
std::vector<exchange::OrderRequest> rebalance_orders(const exchange::Account& account,
                                                     const std::map<std::string, long long>& targets);

}  // namespace alphaloop::strategy
