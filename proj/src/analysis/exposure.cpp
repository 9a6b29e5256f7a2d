#include <algorithm>

#include "alphaloop/analysis/analysis.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/core/stats.hpp"
#include "json.hpp"

namespace alphaloop::analysis {

ExposureFit exposure_volatility(const IndexBars& index, const std::vector<double>& net_position,
                                std::size_t stride) {
  const std::size_t n = index.open.size();
  if (index.high.size() != n || index.low.size() != n || net_position.size() != n) {
    throw Error(ErrorCode::LengthMismatch,
                "exposure: index has " + std::to_string(n) + " rows, positions " +
                    std::to_string(net_position.size()));
  }
  if (stride < 1 || n < 2 * stride) {
    throw Error(ErrorCode::InsufficientHistory,
                "exposure analysis needs at least " + std::to_string(2 * stride) + " days");
  }
  ExposureFit fit;
  for (std::size_t t = stride - 1; t < n; t += stride) {
    const std::size_t s = t + 1 - stride;
    double hi = index.high[s];
    double lo = index.low[s];
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t u = s; u <= t; ++u) {
      hi = std::max(hi, index.high[u]);
      lo = std::min(lo, index.low[u]);
      if (!is_missing(net_position[u])) {
        sum += net_position[u];
        ++count;
      }
    }
    if (count == 0 || !(index.open[s] > 0.0)) continue;
    fit.series.push_back({t, (hi - lo) / index.open[s], sum / static_cast<double>(count)});
  }
  std::vector<double> v, e;
  for (const auto& s : fit.series) {
    v.push_back(s.v);
    e.push_back(s.e);
  }
  if (const auto f = stats::ols(v, e)) fit.slope = f->slope;
  fit.pearson_r = stats::pearson(v, e);
  return fit;
}

std::string exposure_csv(const ExposureFit& fit, const std::vector<Date>& days) {
  std::string out = "sample_day,V,E\n";
  for (const auto& s : fit.series) {
    const std::string day = s.row < days.size() ? days[s.row].to_string() : std::to_string(s.row);
    out += day + "," + io::format_double(s.v) + "," + io::format_double(s.e) + "\n";
  }
  return out;
}

std::string exposure_fit_json(const ExposureFit& fit) {
  nlohmann::ordered_json j;
  j["slope"] = fit.slope ? nlohmann::ordered_json(*fit.slope) : nlohmann::ordered_json(nullptr);
  j["pearson_r"] =
      fit.pearson_r ? nlohmann::ordered_json(*fit.pearson_r) : nlohmann::ordered_json(nullptr);
  j["samples"] = fit.series.size();
  return j.dump(2) + "\n";
}

}  // namespace alphaloop::analysis
