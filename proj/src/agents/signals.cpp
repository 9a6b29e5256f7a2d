#include "alphaloop/agents/signals.hpp"

#include "alphaloop/dsl/evaluate.hpp"

namespace alphaloop::agents {

const Matrix& SignalCache::get(const std::string& factor_id, const dsl::Expr& expr) {
  const auto it = cache_.find(factor_id);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(factor_id, dsl::evaluate(expr, *panel_)).first->second;
}

const Matrix* SignalCache::find(const std::string& factor_id) const {
  const auto it = cache_.find(factor_id);
  return it == cache_.end() ? nullptr : &it->second;
}

}  // namespace alphaloop::agents
