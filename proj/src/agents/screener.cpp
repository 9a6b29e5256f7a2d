#include "alphaloop/agents/screener.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <spdlog/spdlog.h>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/stats.hpp"
#include "alphaloop/dsl/parser.hpp"
#include "alphaloop/lab/validation.hpp"

namespace alphaloop::agents {

double regime_multiplier(lab::Category c, const RegimeAssessment& r) {
  const bool trending = r.trend_value >= 0.75 || r.trend_value <= 0.25;
  const bool range_bound = r.trend_level == 2;
  switch (c) {
    case lab::Category::Momentum:
      return trending ? 1.25 : (range_bound ? 0.75 : 1.0);
    case lab::Category::Reversal:
      return range_bound ? 1.25 : (trending ? 0.75 : 1.0);
    case lab::Category::Volatility:
      return r.vol_level == 4 ? 1.25 : (r.vol_level == 0 ? 0.75 : 1.0);
    case lab::Category::Liquidity:
      return r.corr_level == 4 ? 1.25 : (r.corr_level == 0 ? 0.75 : 1.0);
    default:
      return 1.0;
  }
}

std::optional<RecentIc> recent_ic(const Matrix& signal, const Matrix& fwd1, std::size_t row,
                                  int window) {
  if (row < 1 || window < 1) return std::nullopt;
  const std::size_t last = row - 1;
  const std::size_t first = last + 1 >= static_cast<std::size_t>(window)
                                ? last + 1 - static_cast<std::size_t>(window)
                                : 0;
  std::vector<lab::IcPoint> ics;
  try {
    ics = lab::ic_series(signal, fwd1, first, last);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::NoValidDays) return std::nullopt;
    throw;
  }
  std::vector<double> v;
  v.reserve(ics.size());
  for (const auto& p : ics) v.push_back(p.ic);
  RecentIc out;
  out.days = static_cast<int>(v.size());
  out.mean_ic = stats::mean(v);
  out.ic_std = stats::sample_std(v);
  out.icir = out.mean_ic / std::max(out.ic_std, lab::kDegenerateIcStd);
  return out;
}

double signal_correlation(const Matrix& a, const Matrix& b, std::size_t row, int window) {
  const std::size_t first = row + 1 >= static_cast<std::size_t>(window)
                                ? row + 1 - static_cast<std::size_t>(window)
                                : 0;
  double sum = 0.0;
  int n = 0;
  std::vector<double> x, y;
  for (std::size_t t = first; t <= row; ++t) {
    x.clear();
    y.clear();
    const auto ra = a.row(t);
    const auto rb = b.row(t);
    for (std::size_t j = 0; j < ra.size(); ++j) {
      if (!is_missing(ra[j]) && !is_missing(rb[j])) {
        x.push_back(ra[j]);
        y.push_back(rb[j]);
      }
    }
    if (x.size() < 3) continue;
    if (const auto r = stats::pearson(x, y)) {
      sum += *r;
      ++n;
    }
  }
  return n == 0 ? 0.0 : std::abs(sum / n);
}

nlohmann::ordered_json to_json(const strategy::EnsembleEntry& e) {
  nlohmann::ordered_json j;
  j["factor_id"] = e.factor_id;
  j["weight"] = e.weight;
  j["direction"] = e.direction;
  j["hint"] = std::string(strategy::to_string(e.hint));
  return j;
}

nlohmann::ordered_json ensemble_json(const std::vector<strategy::EnsembleEntry>& ensemble) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& e : ensemble) arr.push_back(to_json(e));
  return arr;
}

void rank_factors(std::vector<ScoredFactor>& scored) {
  std::sort(scored.begin(), scored.end(), [](const ScoredFactor& a, const ScoredFactor& b) {
    if (a.suitability != b.suitability) return a.suitability > b.suitability;
    return a.factor_id < b.factor_id;
  });
}

std::vector<strategy::EnsembleEntry> build_ensemble(
    const std::vector<ScoredFactor>& ranked,
    const std::function<double(const std::string&, const std::string&)>& corr,
    const ScreenerConfig& cfg) {
  std::vector<const ScoredFactor*> chosen;
  for (const auto& s : ranked) {
    if (static_cast<int>(chosen.size()) >= cfg.k) break;
    const bool distinct = std::all_of(chosen.begin(), chosen.end(), [&](const ScoredFactor* c) {
      return corr(s.factor_id, c->factor_id) < cfg.corr_threshold;
    });
    if (distinct) chosen.push_back(&s);
  }
  double total = 0.0;
  for (const auto* c : chosen) total += c->suitability;
  std::vector<strategy::EnsembleEntry> out;
  for (const auto* c : chosen) {
    strategy::EnsembleEntry e;
    e.factor_id = c->factor_id;
    e.weight = total > 0.0 ? c->suitability / total : 1.0 / static_cast<double>(chosen.size());
    e.direction = c->ic.mean_ic >= 0.0 ? 1 : -1;
    e.hint = cfg.hint;
    out.push_back(e);
  }
  return out;
}

Screener::Screener(const PricePanel& panel, ScreenerConfig cfg)
    : panel_(&panel), cfg_(cfg), fwd1_(forward_return(panel.close(), 1)) {}

std::optional<std::vector<strategy::EnsembleEntry>> Screener::external(
    PolicyBackend& policy, const std::vector<ScoredFactor>& ranked, const lab::FactorLibrary& lib,
    std::size_t row, const std::optional<RegimeAssessment>& regime) const {
  nlohmann::json inputs;
  inputs["day"] = panel_->calendar()[row].to_string();
  inputs["k"] = cfg_.k;
  if (regime) inputs["regime"] = nlohmann::json::parse(to_json(*regime).dump());
  inputs["candidates"] = nlohmann::json::array();
  for (const auto& s : ranked) {
    inputs["candidates"].push_back({{"factor_id", s.factor_id},
                                    {"expression", lib.find(s.factor_id)->expression},
                                    {"category", std::string(lab::to_string(s.category))},
                                    {"recent_mean_ic", s.ic.mean_ic},
                                    {"recent_icir", s.ic.icir}});
  }
  const auto reply = policy.query("screener", inputs);
  if (!reply) return std::nullopt;
  try {
    std::vector<strategy::EnsembleEntry> out;
    std::set<std::string> seen;
    double total = 0.0;
    for (const auto& item : reply->at("ensemble")) {
      strategy::EnsembleEntry e;
      e.factor_id = item.at("factor_id").get<std::string>();
      e.weight = item.at("weight").get<double>();
      e.direction = item.at("direction").get<int>();
      e.hint = cfg_.hint;
      if (item.contains("hint")) {
        const auto h = strategy::parse_hint(item["hint"].get<std::string>());
        if (!h) throw std::invalid_argument("unknown hint");
        e.hint = *h;
      }
      const auto* rec = lib.find(e.factor_id);
      if (!rec || rec->status != lab::Status::Effective || !seen.insert(e.factor_id).second ||
          !(e.weight >= 0.0) || (e.direction != 1 && e.direction != -1)) {
        throw std::invalid_argument("bad entry for " + e.factor_id);
      }
      total += e.weight;
      out.push_back(e);
    }
    if (out.empty() || std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
    return out;
  } catch (const std::exception& e) {
    spdlog::warn("external screener response rejected ({}), using the deterministic screener",
                 e.what());
    return std::nullopt;
  }
}

ScreenResult Screener::cycle(const lab::FactorLibrary& lib, SignalCache& signals,
                             MemoryStore& memory, std::size_t row,
                             const std::optional<RegimeAssessment>& regime,
                             PolicyBackend* policy) const {
  ScreenResult out;
  const auto effective = lib.with_status(lab::Status::Effective);
  const Date day = panel_->calendar()[row];
  const auto skip = [&](const std::string& reason) {
    out.skipped = true;
    Event ev{day, "screener", "skip", Meta::InsufficientFactors, {}};
    ev.payload["effective"] = effective.size();
    ev.payload["required"] = cfg_.min_factors;
    ev.payload["reason"] = reason;
    memory.append(std::move(ev));
    return out;
  };
  if (static_cast<int>(effective.size()) < cfg_.min_factors) return skip("too few effective factors");

  std::map<std::string, const Matrix*> sig;
  for (const auto* r : effective) {
    const Matrix* mp = nullptr;
    try {
      mp = &signals.get(r->factor_id, dsl::parse(r->expression));
    } catch (const Error& e) {
      spdlog::debug("screener skips {}: {}", r->factor_id, e.what());
      continue;
    }
    const Matrix& m = *mp;
    const auto ic = recent_ic(m, fwd1_, row, cfg_.icir_window);
    if (!ic) continue;
    ScoredFactor s;
    s.factor_id = r->factor_id;
    s.category = r->category;
    s.ic = *ic;
    s.multiplier = regime ? regime_multiplier(r->category, *regime) : 1.0;
    s.suitability = std::abs(ic->icir) * s.multiplier;
    out.ranked.push_back(s);
    sig[r->factor_id] = &m;
  }
  rank_factors(out.ranked);
  if (out.ranked.empty()) return skip("no factor has a measurable recent IC");

  if (policy && policy->kind() == PolicyKind::External) {
    if (auto ext = external(*policy, out.ranked, lib, row, regime)) out.ensemble = std::move(*ext);
  }
  if (out.ensemble.empty()) {
    out.ensemble = build_ensemble(
        out.ranked,
        [&](const std::string& a, const std::string& b) {
          return signal_correlation(*sig.at(a), *sig.at(b), row, cfg_.corr_window);
        },
        cfg_);
  }

  Event ev{day, "screener", "ensemble", std::nullopt, {}};
  ev.payload["mode"] = "suitability";
  ev.payload["entries"] = ensemble_json(out.ensemble);
  if (regime) ev.payload["regime"] = to_json(*regime);
  memory.append(std::move(ev));
  return out;
}

}  // namespace alphaloop::agents
