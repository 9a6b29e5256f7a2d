#pragma once

#include <map>
#include <string>

#include "alphaloop/core/matrix.hpp"
#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::agents {

/// Factor signals evaluated once over the whole panel. Every operator only
/// looks backwards in time, so row t of a cached signal uses data up to t.
class SignalCache {
 public:
  explicit SignalCache(const PricePanel& panel) : panel_(&panel) {}

  /// Evaluation errors propagate and nothing is cached.
  const Matrix& get(const std::string& factor_id, const dsl::Expr& expr);
  const Matrix* find(const std::string& factor_id) const;
  const PricePanel& panel() const { return *panel_; }

 private:
  const PricePanel* panel_;
  std::map<std::string, Matrix> cache_;
};

}  // namespace alphaloop::agents
