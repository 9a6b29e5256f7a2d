#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "alphaloop/dsl/expr.hpp"

namespace alphaloop::dsl {

struct ReferenceFactor {
  std::string category;  // momentum, reversal, volatility, liquidity, value
  Expr expr;
};

/// Built-in classical set; data/classical_factors.txt holds the same list.
const std::vector<ReferenceFactor>& classical_reference();

/// One expression per line; `# name` lines set the category of what follows.
std::vector<ReferenceFactor> load_reference(const std::filesystem::path& path);

std::vector<Expr> expressions(const std::vector<ReferenceFactor>& refs);

}  // namespace alphaloop::dsl
