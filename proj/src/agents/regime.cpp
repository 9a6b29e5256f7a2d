#include "alphaloop/agents/regime.hpp"

#include <algorithm>
#include <cmath>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/core/stats.hpp"

namespace alphaloop::agents {

namespace {

constexpr std::array<std::string_view, 5> kTrend = {"strong_downtrend", "downtrend", "range_bound",
                                                    "uptrend", "strong_uptrend"};
constexpr std::array<std::string_view, 5> kVol = {"low", "below_average", "moderate", "elevated",
                                                  "high"};
constexpr std::array<std::string_view, 5> kCorr = {"low_dispersion", "moderate_dispersion",
                                                   "mixed", "correlated", "index_led"};

}  // namespace

int level_of(double value) {
  const int l = static_cast<int>(std::ceil(4.0 * value - 0.5));
  return std::clamp(l, 0, 4);
}

std::string_view label_name(Dimension d, int level) {
  level = std::clamp(level, 0, 4);
  switch (d) {
    case Dimension::Trend: return kTrend[level];
    case Dimension::Vol: return kVol[level];
    case Dimension::Corr: return kCorr[level];
  }
  return "";
}

double sigma0(int days_per_year, double sigma_ann) {
  return sigma_ann * std::sqrt(60.0 / static_cast<double>(days_per_year));
}

double trend_value(double r60, double s0) { return 1.0 / (1.0 + std::exp(-r60 / s0)); }

double vol_value(double sigma, double q05, double q95) {
  if (!(q95 > q05)) return sigma > q05 ? 1.0 : 0.0;
  return std::clamp((sigma - q05) / (q95 - q05), 0.0, 1.0);
}

double corr_value(const Matrix& returns) {
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < returns.cols(); ++j) {
    std::vector<double> c(returns.rows());
    bool full = true;
    for (std::size_t i = 0; i < returns.rows() && full; ++i) {
      c[i] = returns(i, j);
      full = !is_missing(c[i]);
    }
    if (full) cols.push_back(std::move(c));
  }
  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a + 1 < cols.size(); ++a) {
    for (std::size_t b = a + 1; b < cols.size(); ++b) {
      if (const auto r = stats::pearson(cols[a], cols[b])) {
        sum += std::abs(*r);
        ++pairs;
      }
    }
  }
  return pairs == 0 ? 0.0 : sum / static_cast<double>(pairs);
}

RegimeAssessment make_assessment(Date as_of, double trend, double vol, double corr) {
  RegimeAssessment a;
  a.as_of = as_of;
  a.trend_value = trend;
  a.vol_value = vol;
  a.corr_value = corr;
  a.trend_level = level_of(trend);
  a.vol_level = level_of(vol);
  a.corr_level = level_of(corr);
  return a;
}

nlohmann::ordered_json to_json(const RegimeAssessment& a) {
  nlohmann::ordered_json j;
  j["as_of"] = a.as_of.to_string();
  j["trend"] = label_name(Dimension::Trend, a.trend_level);
  j["vol"] = label_name(Dimension::Vol, a.vol_level);
  j["corr"] = label_name(Dimension::Corr, a.corr_level);
  j["trend_value"] = a.trend_value;
  j["vol_value"] = a.vol_value;
  j["corr_value"] = a.corr_value;
  return j;
}

std::string assessments_csv(const std::vector<RegimeAssessment>& rows) {
  std::string out = "day,trend_value,vol_value,corr_value,trend_label,vol_label,corr_label\n";
  for (const auto& a : rows) {
    out += a.as_of.to_string() + ',' + io::format_double(a.trend_value) + ',' +
           io::format_double(a.vol_value) + ',' + io::format_double(a.corr_value) + ',' +
           std::string(label_name(Dimension::Trend, a.trend_level)) + ',' +
           std::string(label_name(Dimension::Vol, a.vol_level)) + ',' +
           std::string(label_name(Dimension::Corr, a.corr_level)) + '\n';
  }
  return out;
}

RegimeAssessor::RegimeAssessor(const PricePanel& panel, std::size_t ref_first,
                               std::size_t ref_last, RegimeConfig cfg)
    : panel_(&panel), cfg_(cfg), days_per_year_(panel.calendar().days_per_year()) {
  std::size_t lo = ref_first;
  std::size_t hi = std::min(ref_last, panel.num_days() - 1);
  if (cfg_.full_sample_quantiles) {
    lo = 0;
    hi = panel.num_days() - 1;
  }
  std::vector<double> sample;
  for (std::size_t t = std::max<std::size_t>(lo, cfg_.vol_window); t <= hi; ++t) {
    const double v = realized_vol(t);
    if (!is_missing(v)) sample.push_back(v);
  }
  if (sample.empty()) {
    throw Error(ErrorCode::InsufficientHistory,
                "vol reference sample needs more than " + std::to_string(cfg_.vol_window) +
                    " index days");
  }
  q05_ = stats::quantile(sample, 0.05);
  q95_ = stats::quantile(sample, 0.95);
}

double RegimeAssessor::realized_vol(std::size_t row) const {
  const auto& c = panel_->index().close;
  const auto w = static_cast<std::size_t>(cfg_.vol_window);
  if (row < w || row >= c.size()) return kMissing;
  std::vector<double> r;
  r.reserve(w);
  for (std::size_t t = row + 1 - w; t <= row; ++t) r.push_back(c[t] / c[t - 1] - 1.0);
  for (const double x : r)
    if (is_missing(x)) return kMissing;
  return stats::sample_std(r) * std::sqrt(static_cast<double>(days_per_year_));
}

RegimeAssessment RegimeAssessor::assess(std::size_t row) const {
  const auto& c = panel_->index().close;
  const auto tw = static_cast<std::size_t>(cfg_.trend_window);
  const auto cw = static_cast<std::size_t>(cfg_.corr_window);
  if (row >= c.size() || row < tw || row < cw || row < static_cast<std::size_t>(cfg_.vol_window)) {
    throw Error(ErrorCode::InsufficientHistory,
                "regime needs " + std::to_string(tw) + " prior index days");
  }
  const double r60 = std::log(c[row] / c[row - tw]);
  const double trend = trend_value(r60, sigma0(days_per_year_, cfg_.sigma_ann));
  const double vol = vol_value(realized_vol(row), q05_, q95_);

  const Matrix& close = panel_->close();
  Matrix rets(cw, panel_->num_assets());
  for (std::size_t i = 0; i < cw; ++i) {
    const std::size_t t = row + 1 - cw + i;
    for (std::size_t j = 0; j < panel_->num_assets(); ++j) {
      if (!panel_->is_member(row, j)) continue;
      const double prev = close(t - 1, j);
      const double cur = close(t, j);
      if (!is_missing(prev) && !is_missing(cur) && prev > 0.0) rets(i, j) = cur / prev - 1.0;
    }
  }
  return make_assessment(panel_->calendar()[row], trend, vol, corr_value(rets));
}

}  // namespace alphaloop::agents
