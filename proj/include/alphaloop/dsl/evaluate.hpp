#pragma once

#include "alphaloop/core/matrix.hpp"
#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::dsl {

/// Day x asset signal. Fields read as missing for assets outside the universe
/// on that day. Throws UnknownField, EmptyCrossSection.
Matrix evaluate(const Expr& e, const PricePanel& panel);

/// Per-row cross-sectional transforms over non-missing cells. Rows with fewer
/// than two values become all-missing.
void cs_rank_rows(Matrix& m);
void cs_zscore_rows(Matrix& m);
void cs_winsorize_rows(Matrix& m, double p);

}  // namespace alphaloop::dsl
