#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "alphaloop/dsl/expr.hpp"

namespace alphaloop::dsl {

/// Ordered labelled tree used by the edit-distance routines.
struct LabeledTree {
  std::string label;
  std::vector<LabeledTree> children;
};

LabeledTree to_labeled_tree(const Expr& e);
std::size_t tree_size(const LabeledTree& t);

/// Ordered tree edit distance, unit insert/delete/relabel costs (Zhang-Shasha).
std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b);

/// TED(a,b) / (|a| + |b|) on canonicalized trees; in [0, 1].
double nted(const Expr& a, const Expr& b);

/// Mean NTED over unordered pairs. Throws TooFewFactors when n < 2.
double phi_intra(const std::vector<Expr>& library);

/// Mean over the library of the NTED to the nearest reference expression.
/// Throws EmptyReference (either set empty).
double phi_inter(const std::vector<Expr>& library, const std::vector<Expr>& reference);

}  // namespace alphaloop::dsl
