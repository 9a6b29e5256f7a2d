#include "alphaloop/dsl/diversity.hpp"

#include <algorithm>
#include <limits>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"

namespace alphaloop::dsl {

namespace {

/// Postorder layout of a tree: labels and leftmost-leaf index per node.
struct Postorder {
  std::vector<const std::string*> labels;
  std::vector<std::size_t> leftmost;
  std::vector<std::size_t> keyroots;
};

std::size_t walk(const LabeledTree& t, Postorder& out) {
  std::size_t first_leaf = std::numeric_limits<std::size_t>::max();
  for (const auto& c : t.children) {
    const std::size_t l = walk(c, out);
    if (first_leaf == std::numeric_limits<std::size_t>::max()) first_leaf = l;
  }
  const std::size_t index = out.labels.size();
  if (first_leaf == std::numeric_limits<std::size_t>::max()) first_leaf = index;
  out.labels.push_back(&t.label);
  out.leftmost.push_back(first_leaf);
  return first_leaf;
}

Postorder layout(const LabeledTree& t) {
  Postorder p;
  walk(t, p);
  // A keyroot is the highest node for each distinct leftmost leaf.
  const std::size_t n = p.labels.size();
  std::vector<bool> seen(n, false);
  for (std::size_t i = n; i-- > 0;) {
    if (!seen[p.leftmost[i]]) {
      seen[p.leftmost[i]] = true;
      p.keyroots.push_back(i);
    }
  }
  std::sort(p.keyroots.begin(), p.keyroots.end());
  return p;
}

}  // namespace

LabeledTree to_labeled_tree(const Expr& e) {
  LabeledTree t;
  switch (e.op()) {
    case Op::Field: t.label = std::string(field_name(e.node().field)); break;
    case Op::Number: t.label = io::format_double(e.node().number); break;
    default: t.label = std::string(op_name(e.op())); break;
  }
  for (const auto& a : e.args()) t.children.push_back(to_labeled_tree(a));
  return t;
}

std::size_t tree_size(const LabeledTree& t) {
  std::size_t n = 1;
  for (const auto& c : t.children) n += tree_size(c);
  return n;
}

std::size_t tree_edit_distance(const LabeledTree& a, const LabeledTree& b) {
  const Postorder A = layout(a);
  const Postorder B = layout(b);
  const std::size_t na = A.labels.size();
  const std::size_t nb = B.labels.size();
  std::vector<std::size_t> td(na * nb, 0);
  std::vector<std::size_t> fd((na + 1) * (nb + 1), 0);
  const auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return fd[i * (nb + 1) + j]; };

  for (std::size_t ki : A.keyroots) {
    for (std::size_t kj : B.keyroots) {
      const std::size_t li = A.leftmost[ki];
      const std::size_t lj = B.leftmost[kj];
      // Forest distances over rows li..ki and cols lj..kj, offset by one.
      const std::size_t rows = ki - li + 2;
      const std::size_t cols = kj - lj + 2;
      for (std::size_t x = 0; x < rows; ++x) {
        for (std::size_t y = 0; y < cols; ++y) at(x, y) = 0;
      }
      for (std::size_t x = 1; x < rows; ++x) at(x, 0) = at(x - 1, 0) + 1;
      for (std::size_t y = 1; y < cols; ++y) at(0, y) = at(0, y - 1) + 1;
      for (std::size_t x = 1; x < rows; ++x) {
        const std::size_t i = li + x - 1;
        for (std::size_t y = 1; y < cols; ++y) {
          const std::size_t j = lj + y - 1;
          const std::size_t del = at(x - 1, y) + 1;
          const std::size_t ins = at(x, y - 1) + 1;
          if (A.leftmost[i] == li && B.leftmost[j] == lj) {
            const std::size_t rel = at(x - 1, y - 1) + (*A.labels[i] == *B.labels[j] ? 0 : 1);
            at(x, y) = std::min({del, ins, rel});
            td[i * nb + j] = at(x, y);
          } else {
            const std::size_t px = A.leftmost[i] - li;
            const std::size_t py = B.leftmost[j] - lj;
            at(x, y) = std::min({del, ins, at(px, py) + td[i * nb + j]});
          }
        }
      }
    }
  }
  return td[(na - 1) * nb + (nb - 1)];
}

double nted(const Expr& a, const Expr& b) {
  const LabeledTree ta = to_labeled_tree(canonicalize(a));
  const LabeledTree tb = to_labeled_tree(canonicalize(b));
  const double total = static_cast<double>(tree_size(ta) + tree_size(tb));
  return static_cast<double>(tree_edit_distance(ta, tb)) / total;
}

double phi_intra(const std::vector<Expr>& library) {
  const std::size_t n = library.size();
  if (n < 2) {
    throw Error(ErrorCode::TooFewFactors, "intra-library diversity needs at least two factors");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) sum += nted(library[i], library[j]);
  }
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

double phi_inter(const std::vector<Expr>& library, const std::vector<Expr>& reference) {
  if (library.empty() || reference.empty()) {
    throw Error(ErrorCode::EmptyReference, "inter-library diversity needs non-empty sets");
  }
  double sum = 0.0;
  for (const auto& a : library) {
    double best = 1.0;
    for (const auto& b : reference) best = std::min(best, nted(a, b));
    sum += best;
  }
  return sum / static_cast<double>(library.size());
}

}  // namespace alphaloop::dsl
