#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "alphaloop/core/date.hpp"
#include "alphaloop/core/matrix.hpp"
#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::lab {

struct IcPoint {
  std::size_t day;  // row index of the signal
  double ic;
};

/// Per-day correlation of signal row t with fwd row t over rows [first, last].
/// Days with fewer than 3 paired values or zero variance are skipped. With
/// `rank` both sides are ranked first (Spearman). Throws NoValidDays.
std::vector<IcPoint> ic_series(const Matrix& signal, const Matrix& fwd, std::size_t first,
                               std::size_t last, bool rank = false);
std::vector<IcPoint> ic_series(const Matrix& signal, const Matrix& fwd, bool rank = false);

/// IC dispersion at or below this is treated as zero (round-off of a
/// perfectly stable IC series).
inline constexpr double kDegenerateIcStd = 1e-12;

struct ValidationReport {
  std::string factor_id;
  DateRange window;
  double mean_ic = 0.0;
  double ic_std = 0.0;
  double icir = 0.0;  // missing when degenerate
  double ic_hit_ratio = 0.0;
  double turnover = 0.0;
  double coverage = 0.0;
  std::vector<std::pair<int, double>> decay;  // (h, mean IC), h = 1..10
  Date validated_on;

  bool degenerate() const { return !(ic_std > kDegenerateIcStd); }
};

struct ValidateOptions {
  bool rank_ic = false;
  int max_horizon = 10;
};

/// Forward returns at horizon h are used only where t + h stays inside the
/// window, so no price after window.end is read.
ValidationReport validate(const dsl::Expr& expr, const PricePanel& panel, DateRange window,
                          const ValidateOptions& opts = {});

/// Same as validate() on a signal already evaluated over the whole panel.
ValidationReport validate_signal(const Matrix& signal, const PricePanel& panel, DateRange window,
                                 const ValidateOptions& opts = {});

struct AcceptanceConfig {
  double ic_min = 0.015;
  double icir_min = 0.25;
  double coverage_min = 0.80;
  double turnover_max = 0.35;
};

bool accept(const ValidationReport& report, const AcceptanceConfig& cfg = {});

}  // namespace alphaloop::lab
