#include "alphaloop/lab/validation.hpp"

#include <algorithm>
#include <cmath>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/stats.hpp"
#include "alphaloop/dsl/evaluate.hpp"

namespace alphaloop::lab {

namespace {

struct Rows {
  std::size_t first;
  std::size_t last;
};

Rows window_rows(const PricePanel& panel, DateRange window) {
  const auto& cal = panel.calendar();
  if (window.end < window.start || window.start < cal.front() || cal.back() < window.end) {
    throw Error(ErrorCode::DateOutOfRange, "validation window [" + window.start.to_string() +
                                               ", " + window.end.to_string() +
                                               "] outside the panel");
  }
  const std::size_t first = cal.lower_bound(window.start);
  const auto last = cal.last_at_or_before(window.end);
  if (!last || first > *last) throw Error(ErrorCode::NoValidDays, "validation window has no days");
  return {first, *last};
}

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double mean_of(const std::vector<IcPoint>& ics) {
  double s = 0.0;
  for (const auto& p : ics) s += p.ic;
  return s / static_cast<double>(ics.size());
}

/// Forward return at horizon h restricted to the window: rows whose t + h is
/// past `last` stay missing.
Matrix windowed_forward(const Matrix& close, std::size_t first, std::size_t last, int h) {
  Matrix out(close.rows(), close.cols());
  const auto hh = static_cast<std::size_t>(h);
  for (std::size_t t = first; t + hh <= last; ++t) {
    for (std::size_t i = 0; i < close.cols(); ++i) {
      const double c0 = close(t, i);
      const double c1 = close(t + hh, i);
      if (!is_missing(c0) && !is_missing(c1)) out(t, i) = c1 / c0 - 1.0;
    }
  }
  return out;
}

double coverage(const Matrix& signal, const PricePanel& panel, std::size_t first,
                std::size_t last) {
  double sum = 0.0;
  std::size_t days = 0;
  for (std::size_t t = first; t <= last; ++t) {
    std::size_t members = 0;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < panel.num_assets(); ++i) {
      if (!panel.is_member(t, i)) continue;
      ++members;
      covered += !is_missing(signal(t, i));
    }
    if (members == 0) continue;
    sum += static_cast<double>(covered) / static_cast<double>(members);
    ++days;
  }
  return days == 0 ? 0.0 : sum / static_cast<double>(days);
}

double turnover(const Matrix& signal, std::size_t first, std::size_t last) {
  double sum = 0.0;
  std::size_t pairs = 0;
  std::vector<double> a, b;
  for (std::size_t t = first + 1; t <= last; ++t) {
    a.clear();
    b.clear();
    for (std::size_t i = 0; i < signal.cols(); ++i) {
      const double x = signal(t - 1, i);
      const double y = signal(t, i);
      if (is_missing(x) || is_missing(y)) continue;
      a.push_back(x);
      b.push_back(y);
    }
    if (a.size() < 3) continue;
    const auto rho = stats::spearman(a, b);
    if (!rho) continue;
    sum += std::clamp(1.0 - *rho, 0.0, 1.0);
    ++pairs;
  }
  // No measurable day-to-day ranking is treated as maximal churn.
  return pairs == 0 ? 1.0 : sum / static_cast<double>(pairs);
}

}  // namespace

std::vector<IcPoint> ic_series(const Matrix& signal, const Matrix& fwd, std::size_t first,
                               std::size_t last, bool rank) {
  if (signal.rows() != fwd.rows() || signal.cols() != fwd.cols()) {
    throw Error(ErrorCode::LengthMismatch, "signal and forward returns are not aligned");
  }
  std::vector<IcPoint> out;
  std::vector<double> x, y;
  for (std::size_t t = first; t <= last && t < signal.rows(); ++t) {
    x.clear();
    y.clear();
    for (std::size_t i = 0; i < signal.cols(); ++i) {
      const double s = signal(t, i);
      const double r = fwd(t, i);
      if (is_missing(s) || is_missing(r)) continue;
      x.push_back(s);
      y.push_back(r);
    }
    if (x.size() < 3) continue;
    const auto ic = rank ? stats::spearman(x, y) : stats::pearson(x, y);
    if (ic) out.push_back({t, *ic});
  }
  if (out.empty()) throw Error(ErrorCode::NoValidDays, "no day has a defined IC");
  return out;
}

std::vector<IcPoint> ic_series(const Matrix& signal, const Matrix& fwd, bool rank) {
  if (signal.rows() == 0) throw Error(ErrorCode::NoValidDays, "empty signal");
  return ic_series(signal, fwd, 0, signal.rows() - 1, rank);
}

ValidationReport validate_signal(const Matrix& signal, const PricePanel& panel, DateRange window,
                                 const ValidateOptions& opts) {
  const Rows rows = window_rows(panel, window);
  ValidationReport rep;
  rep.window = window;
  rep.validated_on = panel.calendar()[rows.last];

  const Matrix fwd1 = windowed_forward(panel.close(), rows.first, rows.last, 1);
  const auto ics = ic_series(signal, fwd1, rows.first, rows.last, opts.rank_ic);
  std::vector<double> vals;
  for (const auto& p : ics) vals.push_back(p.ic);
  rep.mean_ic = stats::mean(vals);
  rep.ic_std = stats::sample_std(vals);
  rep.icir = rep.degenerate() ? kMissing : rep.mean_ic / rep.ic_std;
  std::size_t hits = 0;
  for (double v : vals) hits += sign(v) == sign(rep.mean_ic);
  rep.ic_hit_ratio = static_cast<double>(hits) / static_cast<double>(vals.size());
  rep.coverage = coverage(signal, panel, rows.first, rows.last);
  rep.turnover = turnover(signal, rows.first, rows.last);

  rep.decay.emplace_back(1, rep.mean_ic);
  for (int h = 2; h <= opts.max_horizon; ++h) {
    double v = kMissing;
    if (rows.first + static_cast<std::size_t>(h) <= rows.last) {
      try {
        const Matrix fwd = windowed_forward(panel.close(), rows.first, rows.last, h);
        v = mean_of(ic_series(signal, fwd, rows.first, rows.last, opts.rank_ic));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoValidDays) throw;
      }
    }
    rep.decay.emplace_back(h, v);
  }
  return rep;
}

ValidationReport validate(const dsl::Expr& expr, const PricePanel& panel, DateRange window,
                          const ValidateOptions& opts) {
  return validate_signal(dsl::evaluate(expr, panel), panel, window, opts);
}

bool accept(const ValidationReport& r, const AcceptanceConfig& cfg) {
  if (!(std::abs(r.mean_ic) >= cfg.ic_min)) return false;
  if (!r.degenerate() && !(std::abs(r.icir) >= cfg.icir_min)) return false;
  return r.coverage >= cfg.coverage_min && r.turnover <= cfg.turnover_max;
}

}  // namespace alphaloop::lab
