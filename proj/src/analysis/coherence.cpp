#include <algorithm>
#include <cmath>
#include <cstdio>

#include "alphaloop/analysis/analysis.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"

namespace alphaloop::analysis {

Matrix min_max_normalize(const Matrix& m, bool* degenerate) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (double v : m.row(r)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const bool flat = !(hi > lo);
  if (degenerate) *degenerate = flat;
  Matrix out(m.rows(), m.cols(), 1.0);
  if (flat) return out;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = (m(r, c) - lo) / (hi - lo);
  }
  return out;
}

CoherenceMatrix coherence_matrix(agents::Dimension dim, const std::vector<double>& semantic,
                                 const std::vector<double>& market) {
  if (semantic.size() != market.size()) {
    throw Error(ErrorCode::LengthMismatch, "coherence: " + std::to_string(semantic.size()) +
                                               " labels vs " + std::to_string(market.size()) +
                                               " proxies");
  }
  if (semantic.size() < 2) {
    throw Error(ErrorCode::LengthMismatch, "coherence needs at least two cycles");
  }
  const std::size_t n = semantic.size();
  CoherenceMatrix out;
  out.dimension = dim;
  out.raw = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) out.raw(i, j) = 1.0 - std::abs(semantic[i] - market[j]);
  }
  out.normalized = min_max_normalize(out.raw, &out.degenerate);
  return out;
}

std::vector<CoherenceMatrix> coherence_matrices(
    const std::vector<agents::RegimeAssessment>& assessments,
    const std::vector<MarketProxy>& proxies) {
  if (assessments.size() != proxies.size()) {
    throw Error(ErrorCode::LengthMismatch, "coherence: " + std::to_string(assessments.size()) +
                                               " assessments vs " +
                                               std::to_string(proxies.size()) + " proxies");
  }
  std::vector<double> st, sv, sc, mt, mv, mc;
  for (std::size_t i = 0; i < assessments.size(); ++i) {
    st.push_back(agents::level_value(assessments[i].trend_level));
    sv.push_back(agents::level_value(assessments[i].vol_level));
    sc.push_back(agents::level_value(assessments[i].corr_level));
    mt.push_back(proxies[i].trend);
    mv.push_back(proxies[i].vol);
    mc.push_back(proxies[i].corr);
  }
  return {coherence_matrix(agents::Dimension::Trend, st, mt),
          coherence_matrix(agents::Dimension::Vol, sv, mv),
          coherence_matrix(agents::Dimension::Corr, sc, mc)};
}

std::string coherence_csv(const CoherenceMatrix& m) {
  std::string out = "i,j,raw,normalized\n";
  for (std::size_t i = 0; i < m.raw.rows(); ++i) {
    for (std::size_t j = 0; j < m.raw.cols(); ++j) {
      out += std::to_string(i) + "," + std::to_string(j) + "," + io::format_double(m.raw(i, j)) +
             "," + io::format_double(m.normalized(i, j)) + "\n";
    }
  }
  return out;
}

std::string coherence_svg(const CoherenceMatrix& m) {
  const std::size_t n = m.normalized.rows();
  const int cell = n > 60 ? 4 : (n > 20 ? 10 : 24);
  const int margin = 30;
  const int size = static_cast<int>(n) * cell;
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n",
                size + margin, size + margin);
  out += buf;
  const char* name = m.dimension == agents::Dimension::Trend ? "trend"
                     : m.dimension == agents::Dimension::Vol ? "vol"
                                                             : "corr";
  std::snprintf(buf, sizeof buf,
                "<text x=\"%d\" y=\"18\" font-family=\"sans-serif\" font-size=\"12\">%s%s</text>\n",
                margin, name, m.degenerate ? " (constant)" : "");
  out += buf;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      // white at 0 to deep blue at 1
      const double v = std::clamp(m.normalized(i, j), 0.0, 1.0);
      const int r = static_cast<int>(std::lround(247 - v * (247 - 8)));
      const int g = static_cast<int>(std::lround(251 - v * (251 - 48)));
      const int b = static_cast<int>(std::lround(255 - v * (255 - 107)));
      std::snprintf(buf, sizeof buf,
                    "<rect x=\"%zu\" y=\"%zu\" width=\"%d\" height=\"%d\" fill=\"rgb(%d,%d,%d)\"/>\n",
                    margin + j * cell, margin + i * cell, cell, cell, r, g, b);
      out += buf;
    }
  }
  out += "</svg>\n";
  return out;
}

}  // namespace alphaloop::analysis
