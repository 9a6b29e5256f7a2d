#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <vector>

#include "alphaloop/core/date.hpp"
#include "alphaloop/core/matrix.hpp"
#include "alphaloop/panel/panel.hpp"
#include "json.hpp"

namespace alphaloop::agents {

enum class Dimension { Trend, Vol, Corr };

/// Nearest of {0, .25, .5, .75, 1}; ties go to the lower level.
int level_of(double value);
inline double level_value(int level) { return 0.25 * level; }
std::string_view label_name(Dimension d, int level);

double sigma0(int days_per_year, double sigma_ann = 0.2);
double trend_value(double r60, double sigma0);
/// Clamped min-max position of sigma between the reference quantiles.
double vol_value(double sigma, double q05, double q95);
/// Mean absolute pairwise Pearson over columns with a complete window;
/// 0 when no pair is measurable.
double corr_value(const Matrix& returns);

struct RegimeAssessment {
  Date as_of;
  double trend_value = 0.5;
  double vol_value = 0.5;
  double corr_value = 0.5;
  int trend_level = 2;
  int vol_level = 2;
  int corr_level = 2;
};

RegimeAssessment make_assessment(Date as_of, double trend, double vol, double corr);
nlohmann::ordered_json to_json(const RegimeAssessment& a);
std::string assessments_csv(const std::vector<RegimeAssessment>& rows);

struct RegimeConfig {
  int trend_window = 60;
  int vol_window = 20;
  int corr_window = 20;
  double sigma_ann = 0.2;
  /// Uses every row of the panel for the vol quantiles (reads the future).
  bool full_sample_quantiles = false;
};

class RegimeAssessor {
 public:
  /// Vol quantiles come from rows [ref_first, ref_last] unless the config asks
  /// for the full sample. Throws InsufficientHistory when no row there has a
  /// complete vol window.
  RegimeAssessor(const PricePanel& panel, std::size_t ref_first, std::size_t ref_last,
                 RegimeConfig cfg = {});

  /// Uses data up to and including `row`. Throws InsufficientHistory.
  RegimeAssessment assess(std::size_t row) const;

  double realized_vol(std::size_t row) const;
  double q05() const { return q05_; }
  double q95() const { return q95_; }

 private:
  const PricePanel* panel_;
  RegimeConfig cfg_;
  int days_per_year_;
  double q05_ = 0.0;
  double q95_ = 0.0;
};

}  // namespace alphaloop::agents
