#include "alphaloop/strategy/reference.hpp"

#include <algorithm>
#include <cmath>

#include "alphaloop/core/error.hpp"
#include "alphaloop/dsl/evaluate.hpp"

namespace alphaloop::strategy {

using exchange::OrderRequest;
using exchange::Side;

std::string_view to_string(TransformHint h) {
  switch (h) {
    case TransformHint::None: return "none";
    case TransformHint::Rank: return "rank";
    case TransformHint::Zscore: return "zscore";
    case TransformHint::Winsorize: return "winsorize";
  }
  return "none";
}

std::optional<TransformHint> parse_hint(std::string_view s) {
  if (s == "none" || s.empty()) return TransformHint::None;
  if (s == "rank") return TransformHint::Rank;
  if (s == "zscore") return TransformHint::Zscore;
  if (s == "winsorize") return TransformHint::Winsorize;
  return std::nullopt;
}

void validate_theta(const Theta& t, const exchange::MarketProfile& profile) {
  auto bad = [](const std::string& why) { throw Error(ErrorCode::InvalidTheta, why); };
  if (t.n_long < 1) bad("n_long must be >= 1");
  if (t.n_short < 0) bad("n_short must be >= 0");
  if (!(t.beta > 0.0 && t.beta <= 1.0)) bad("beta must lie in (0, 1]");
  if (!(t.gamma >= -1.0 && t.gamma <= 1.0)) bad("gamma must lie in [-1, 1]");
  if (!profile.allow_short && t.gamma != 1.0) bad("gamma must be 1 on a market without shorting");
}

std::vector<AssetScore> composite_scores(const std::vector<EnsembleEntry>& ensemble,
                                         const std::map<std::string, const Matrix*>& signals,
                                         std::size_t day, const std::vector<std::string>& assets) {
  if (ensemble.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble has no factors");
  const std::size_t m = assets.size();
  std::vector<double> phi(m, 0.0);
  std::vector<bool> ok(m, true);
  for (const auto& e : ensemble) {
    const auto it = signals.find(e.factor_id);
    if (it == signals.end() || !it->second) {
      throw Error(ErrorCode::EmptyEnsemble, "no signal for factor " + e.factor_id);
    }
    Matrix row(1, m);
    for (std::size_t i = 0; i < m; ++i) row(0, i) = (*it->second)(day, i);
    switch (e.hint) {
      case TransformHint::Rank: dsl::cs_rank_rows(row); break;
      case TransformHint::Zscore: dsl::cs_zscore_rows(row); break;
      case TransformHint::Winsorize: dsl::cs_winsorize_rows(row, kWinsorizeHintP); break;
      case TransformHint::None: break;
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double v = row(0, i);
      if (is_missing(v)) {
        ok[i] = false;
        continue;
      }
      phi[i] += e.weight * static_cast<double>(e.direction) * v;
    }
  }
  std::vector<AssetScore> out;
  for (std::size_t i = 0; i < m; ++i) {
    if (ok[i]) out.push_back({assets[i], phi[i]});
  }
  return out;
}

Selection select(std::vector<AssetScore> scores, int n_long, int n_short) {
  if (n_long < 0 || n_short < 0 ||
      static_cast<std::size_t>(n_long) + static_cast<std::size_t>(n_short) > scores.size()) {
    throw Error(ErrorCode::UniverseTooSmall, "need " + std::to_string(n_long + n_short) +
                                                 " scored assets, have " +
                                                 std::to_string(scores.size()));
  }
  std::sort(scores.begin(), scores.end(), [](const AssetScore& a, const AssetScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.asset < b.asset;
  });
  Selection sel;
  for (int k = 0; k < n_long; ++k) sel.longs.push_back(scores[static_cast<std::size_t>(k)].asset);
  for (std::size_t k = scores.size() - static_cast<std::size_t>(n_short); k < scores.size(); ++k) {
    sel.shorts.push_back(scores[k].asset);
  }
  return sel;
}

ExposureBudget exposure_budget(double nav, const Theta& theta) {
  return {theta.beta * nav * (1.0 + theta.gamma) / 2.0,
          theta.beta * nav * (1.0 - theta.gamma) / 2.0};
}

long long floor_to_lot(double qty, long long lot) {
  if (!(qty > 0.0)) return 0;
  const auto lots = static_cast<long long>(std::floor(qty / static_cast<double>(lot)));
  return lots * lot;
}

std::map<std::string, long long> target_holdings(const Selection& sel, double nav,
                                                 const Theta& theta,
                                                 const exchange::PriceMap& prices,
                                                 const exchange::MarketProfile& profile) {
  const ExposureBudget budget = exposure_budget(nav, theta);
  auto price = [&](const std::string& a) {
    const auto it = prices.find(a);
    if (it == prices.end() || !(it->second > 0.0)) {
      throw Error(ErrorCode::MissingPrice, "no positive price for selected asset " + a);
    }
    return it->second;
  };
  std::map<std::string, long long> targets;
  if (!sel.longs.empty() && budget.v_long > 0.0) {
    const double per = budget.v_long / static_cast<double>(sel.longs.size());
    for (const auto& a : sel.longs) {
      const long long q = floor_to_lot(per / price(a), profile.lot_size);
      if (q > 0) targets[a] = q;
    }
  }
  if (!sel.shorts.empty() && budget.v_short > 0.0 && theta.n_short > 0) {
    const double per = budget.v_short / static_cast<double>(sel.shorts.size());
    for (const auto& a : sel.shorts) {
      const long long q = floor_to_lot(per / price(a), profile.lot_size);
      if (q > 0) targets[a] = -q;
    }
  }
  return targets;
}

std::vector<OrderRequest> rebalance_orders(const exchange::Account& account,
                                           const std::map<std::string, long long>& targets) {
  std::vector<OrderRequest> orders;
  for (const auto& [a, pos] : account.longs) {
    if (!targets.count(a) && pos.qty > 0) orders.push_back({a, Side::Sell, pos.qty, std::nullopt});
  }
  for (const auto& [a, pos] : account.shorts) {
    if (!targets.count(a) && pos.qty > 0) orders.push_back({a, Side::Cover, pos.qty, std::nullopt});
  }
  for (const auto& [a, target] : targets) {
    const auto l = account.longs.find(a);
    const auto s = account.shorts.find(a);
    const long long held_long = l == account.longs.end() ? 0 : l->second.qty;
    const long long held_short = s == account.shorts.end() ? 0 : s->second.qty;
    if (target >= 0) {
      if (held_short > 0) orders.push_back({a, Side::Cover, held_short, std::nullopt});
      const long long delta = target - held_long;
      if (delta > 0) orders.push_back({a, Side::Buy, delta, std::nullopt});
      if (delta < 0) orders.push_back({a, Side::Sell, -delta, std::nullopt});
    } else {
      if (held_long > 0) orders.push_back({a, Side::Sell, held_long, std::nullopt});
      const long long delta = -target - held_short;
      if (delta > 0) orders.push_back({a, Side::Short, delta, std::nullopt});
      if (delta < 0) orders.push_back({a, Side::Cover, -delta, std::nullopt});
    }
  }
  return orders;
}

}  // namespace alphaloop::strategy
