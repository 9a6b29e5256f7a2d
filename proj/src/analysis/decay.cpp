#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "alphaloop/analysis/analysis.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/core/stats.hpp"
#include "alphaloop/dsl/evaluate.hpp"
#include "alphaloop/dsl/parser.hpp"
#include "alphaloop/lab/validation.hpp"

namespace alphaloop::analysis {

namespace {

constexpr std::size_t kOrientationRows = 126;

double sign_of(double v) { return v < 0.0 ? -1.0 : 1.0; }

struct Pick {
  std::size_t index;
  double score;  // |IC| used for ranking
};

// k largest scores, ties broken by printed expression
std::vector<std::size_t> top_k(std::vector<Pick> picks, std::size_t k,
                               const std::vector<std::string>& printed) {
  std::sort(picks.begin(), picks.end(), [&](const Pick& a, const Pick& b) {
    if (a.score != b.score) return a.score > b.score;
    return printed[a.index] < printed[b.index];
  });
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < std::min(k, picks.size()); ++i) out.push_back(picks[i].index);
  return out;
}

DecayRow summarize(std::size_t period, DecayMode mode, const std::vector<double>& ics) {
  DecayRow row;
  row.period = period;
  row.mode = mode;
  row.n_factors = ics.size();
  if (ics.empty()) return row;
  row.mean_ic = stats::mean(ics);
  row.max_ic = *std::max_element(ics.begin(), ics.end());
  row.min_ic = *std::min_element(ics.begin(), ics.end());
  return row;
}

}  // namespace

std::string_view to_string(DecayMode m) {
  switch (m) {
    case DecayMode::GlobalTopK: return "GLOBAL_TOPK";
    case DecayMode::PeriodicTopK: return "PERIODIC_TOPK";
    case DecayMode::AdaptiveLibrary: return "ADAPTIVE_LIBRARY";
  }
  return "GLOBAL_TOPK";
}

DecayMode parse_decay_mode(std::string_view s) {
  if (s == "GLOBAL_TOPK" || s == "global-topk") return DecayMode::GlobalTopK;
  if (s == "PERIODIC_TOPK" || s == "periodic-topk") return DecayMode::PeriodicTopK;
  if (s == "ADAPTIVE_LIBRARY" || s == "adaptive-library") return DecayMode::AdaptiveLibrary;
  throw Error(ErrorCode::ConfigError, "unknown decay mode '" + std::string(s) + "'");
}

std::vector<Period> block_periods(std::size_t first, std::size_t last, std::size_t block) {
  std::vector<Period> out;
  if (block == 0 || last < first) return out;
  for (std::size_t s = first; s <= last; s += block) {
    const std::size_t e = std::min(last, s + block - 1);
    if (e > s) out.push_back({s, e});
  }
  return out;
}

DecayTable::DecayTable(const PricePanel& panel, const std::vector<dsl::Expr>& candidates,
                       std::vector<Period> periods)
    : panel_(&panel), periods_(std::move(periods)), fwd_(forward_return(panel, 1)) {
  for (const auto& e : candidates) {
    if (std::find(printed_.begin(), printed_.end(), dsl::print(e)) == printed_.end()) add(e);
  }
  n_candidates_ = factors_.size();
}

void DecayTable::add(const dsl::Expr& e) {
  factors_.push_back(e);
  printed_.push_back(dsl::print(e));
  try {
    signals_.push_back(dsl::evaluate(e, *panel_));
  } catch (const Error&) {
    signals_.emplace_back();
  }
  const std::size_t i = factors_.size() - 1;
  std::vector<double> per;
  for (const auto& p : periods_) per.push_back(mean_ic(i, p.first, p.last));
  by_period_.push_back(std::move(per));
  horizon_.push_back(periods_.empty() ? kMissing
                                      : mean_ic(i, periods_.front().first, periods_.back().last));
}

std::size_t DecayTable::ensure(const dsl::Expr& e) {
  const std::string text = dsl::print(e);
  const auto it = std::find(printed_.begin(), printed_.end(), text);
  if (it != printed_.end()) return static_cast<std::size_t>(it - printed_.begin());
  add(e);
  return factors_.size() - 1;
}

double DecayTable::mean_ic(std::size_t i, std::size_t first, std::size_t last) const {
  const Matrix& sig = signals_[i];
  if (sig.empty() || fwd_.rows() < 2) return kMissing;
  last = std::min(last, fwd_.rows() - 2);  // the final row has no forward return
  if (last < first) return kMissing;
  try {
    const auto ics = lab::ic_series(sig, fwd_, first, last);
    double s = 0.0;
    for (const auto& p : ics) s += p.ic;
    return s / static_cast<double>(ics.size());
  } catch (const Error&) {
    return kMissing;
  }
}

std::vector<DecayRow> alpha_decay(DecayTable& table, DecayMode mode, std::size_t k,
                                  const std::vector<agents::LibrarySnapshot>& snapshots) {
  if (table.num_candidates() == 0 && mode != DecayMode::AdaptiveLibrary) {
    throw Error(ErrorCode::EmptyCandidateSet, "alpha decay needs at least one candidate factor");
  }
  if (mode == DecayMode::AdaptiveLibrary && snapshots.empty()) {
    throw Error(ErrorCode::EmptyCandidateSet, "adaptive alpha decay needs library snapshots");
  }
  const auto& periods = table.periods();
  std::vector<std::string> printed;
  for (std::size_t i = 0; i < table.num_candidates(); ++i) printed.push_back(dsl::print(table.factor(i)));
  std::vector<DecayRow> rows;

  if (mode == DecayMode::GlobalTopK) {
    std::vector<Pick> picks;
    for (std::size_t i = 0; i < table.num_candidates(); ++i) {
      const double ic = table.horizon_ic(i);
      if (!is_missing(ic)) picks.push_back({i, std::abs(ic)});
    }
    const auto chosen = top_k(picks, k, printed);
    for (std::size_t p = 0; p < periods.size(); ++p) {
      std::vector<double> ics;
      for (std::size_t i : chosen) {
        const double ic = table.period_ic(i, p);
        if (!is_missing(ic)) ics.push_back(sign_of(table.horizon_ic(i)) * ic);
      }
      rows.push_back(summarize(p, mode, ics));
    }
    return rows;
  }

  if (mode == DecayMode::PeriodicTopK) {
    for (std::size_t p = 0; p < periods.size(); ++p) {
      std::vector<Pick> picks;
      for (std::size_t i = 0; i < table.num_candidates(); ++i) {
        const double ic = table.period_ic(i, p);
        if (!is_missing(ic)) picks.push_back({i, std::abs(ic)});
      }
      std::vector<double> ics;
      for (std::size_t i : top_k(picks, k, printed)) ics.push_back(std::abs(table.period_ic(i, p)));
      rows.push_back(summarize(p, mode, ics));
    }
    return rows;
  }

  auto ordered = snapshots;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto& a, const auto& b) { return a.day < b.day; });
  const auto& cal = table.panel().calendar();
  for (std::size_t p = 0; p < periods.size(); ++p) {
    const Date start = cal[periods[p].first];
    const Date end = cal[periods[p].last];
    std::set<std::string> texts;
    const agents::LibrarySnapshot* current = nullptr;
    for (const auto& s : ordered) {
      if (s.day <= start) current = &s;
      if (s.day > start && s.day <= end) {
        for (const auto& [id, text] : s.effective) texts.insert(text);
      }
    }
    if (current) {
      for (const auto& [id, text] : current->effective) texts.insert(text);
    }
    const std::size_t first = periods[p].first;
    const std::size_t ref_first = first > kOrientationRows ? first - kOrientationRows : 0;
    std::vector<double> ics;
    for (const auto& text : texts) {
      const std::size_t i = table.ensure(dsl::parse(text));
      const double ic = table.period_ic(i, p);
      if (is_missing(ic)) continue;
      const double ref = first > 0 ? table.mean_ic(i, ref_first, first - 1) : kMissing;
      ics.push_back((is_missing(ref) ? 1.0 : sign_of(ref)) * ic);
    }
    rows.push_back(summarize(p, mode, ics));
  }
  return rows;
}

std::string decay_csv(const std::vector<DecayRow>& rows) {
  std::string out = "period,mode,mean_ic,max_ic,min_ic\n";
  const auto num = [](double v) { return is_missing(v) ? std::string() : io::format_double(v); };
  for (const auto& r : rows) {
    out += std::to_string(r.period) + "," + std::string(to_string(r.mode)) + "," + num(r.mean_ic) +
           "," + num(r.max_ic) + "," + num(r.min_ic) + "\n";
  }
  return out;
}

}  // namespace alphaloop::analysis
