#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "alphaloop/core/matrix.hpp"
#include "alphaloop/dsl/diversity.hpp"
#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/exchange/exchange.hpp"
#include "alphaloop/panel/panel.hpp"

// Brute-force reference implementations shared by unit and acceptance tests.
namespace alphaloop::testing {

using namespace alphaloop::dsl;
using alphaloop::exchange::OrderStatus;
using alphaloop::exchange::Side;
using alphaloop::exchange::TradeRecord;

inline Expr random_expr(std::mt19937& rng, int depth) {
  static const std::vector<Field> fields = {Field::Open, Field::High, Field::Low, Field::Close,
                                            Field::Volume};
  std::uniform_int_distribution<int> pick(0, 99);
  if (depth == 0 || pick(rng) < 25) {
    if (pick(rng) < 15) return Expr::number(pick(rng) / 10.0 + 0.5);
    return Expr::field(fields[static_cast<std::size_t>(pick(rng)) % fields.size()]);
  }
  const auto& fns = functions();
  const OpInfo& info = fns[static_cast<std::size_t>(pick(rng)) % fns.size()];
  std::vector<Expr> args;
  if (info.kind == OpKind::TimeSeries) {
    args.push_back(random_expr(rng, depth - 1));
    if (info.arity == 3) args.push_back(random_expr(rng, depth - 1));
    args.push_back(Expr::number(2 + pick(rng) % 30));
  } else if (info.op == Op::CsWinsorize) {
    args.push_back(random_expr(rng, depth - 1));
    args.push_back(Expr::number(0.05));
  } else {
    for (int k = 0; k < info.arity; ++k) args.push_back(random_expr(rng, depth - 1));
  }
  return Expr::call(info.op, std::move(args));
}

// ---- exhaustive edit-script oracle over small ordered forests ----

using Forest = std::vector<LabeledTree>;

inline std::string encode(const Forest& f) {
  std::string s;
  for (const auto& t : f) {
    s += t.label;
    s += '(';
    s += encode(t.children);
    s += ')';
  }
  return s;
}

inline std::size_t forest_size(const Forest& f) {
  std::size_t n = 0;
  for (const auto& t : f) n += tree_size(t);
  return n;
}

inline void collect_lists(Forest& f, std::vector<Forest*>& out) {
  out.push_back(&f);
  for (auto& t : f) collect_lists(t.children, out);
}

inline void collect_nodes(Forest& f, std::vector<std::pair<Forest*, std::size_t>>& out) {
  for (std::size_t i = 0; i < f.size(); ++i) {
    out.emplace_back(&f, i);
    collect_nodes(f[i].children, out);
  }
}

inline std::vector<Forest> neighbours(const Forest& f, const std::vector<std::string>& labels,
                               std::size_t max_nodes) {
  std::vector<Forest> out;
  std::vector<std::pair<Forest*, std::size_t>> probe_nodes;
  Forest probe = f;
  collect_nodes(probe, probe_nodes);
  for (std::size_t k = 0; k < probe_nodes.size(); ++k) {
    for (const auto& l : labels) {
      Forest g = f;
      std::vector<std::pair<Forest*, std::size_t>> nodes;
      collect_nodes(g, nodes);
      auto& node = (*nodes[k].first)[nodes[k].second];
      if (node.label == l) continue;
      node.label = l;
      out.push_back(std::move(g));
    }
    Forest g = f;
    std::vector<std::pair<Forest*, std::size_t>> nodes;
    collect_nodes(g, nodes);
    Forest& list = *nodes[k].first;
    const std::size_t pos = nodes[k].second;
    Forest kids = std::move(list[pos].children);
    list.erase(list.begin() + static_cast<std::ptrdiff_t>(pos));
    list.insert(list.begin() + static_cast<std::ptrdiff_t>(pos), kids.begin(), kids.end());
    out.push_back(std::move(g));
  }
  if (forest_size(f) < max_nodes) {
    std::vector<Forest*> probe_lists;
    collect_lists(probe, probe_lists);
    for (std::size_t k = 0; k < probe_lists.size(); ++k) {
      const std::size_t len = probe_lists[k]->size();
      for (std::size_t i = 0; i <= len; ++i) {
        for (std::size_t j = i; j <= len; ++j) {
          for (const auto& l : labels) {
            Forest g = f;
            std::vector<Forest*> lists;
            collect_lists(g, lists);
            Forest& list = *lists[k];
            LabeledTree node{l, {}};
            node.children.assign(std::make_move_iterator(list.begin() + static_cast<std::ptrdiff_t>(i)),
                                 std::make_move_iterator(list.begin() + static_cast<std::ptrdiff_t>(j)));
            list.erase(list.begin() + static_cast<std::ptrdiff_t>(i),
                       list.begin() + static_cast<std::ptrdiff_t>(j));
            list.insert(list.begin() + static_cast<std::ptrdiff_t>(i), std::move(node));
            out.push_back(std::move(g));
          }
        }
      }
    }
  }
  return out;
}

/// BFS distances from `start` to every forest reachable within max_nodes.
inline std::unordered_map<std::string, std::size_t> bfs_all(const LabeledTree& start,
                                                     const std::vector<std::string>& labels,
                                                     std::size_t max_nodes) {
  std::unordered_map<std::string, std::size_t> dist;
  std::deque<Forest> queue;
  Forest s{start};
  dist[encode(s)] = 0;
  queue.push_back(s);
  while (!queue.empty()) {
    Forest f = std::move(queue.front());
    queue.pop_front();
    const std::size_t d = dist[encode(f)];
    for (auto& g : neighbours(f, labels, max_nodes)) {
      const std::string key = encode(g);
      if (dist.count(key)) continue;
      dist[key] = d + 1;
      queue.push_back(std::move(g));
    }
  }
  return dist;
}

/// All ordered labelled trees with exactly n nodes.
inline std::vector<LabeledTree> trees_of_size(std::size_t n, const std::vector<std::string>& labels);

inline std::vector<Forest> forests_of_size(std::size_t n, const std::vector<std::string>& labels) {
  if (n == 0) return {Forest{}};
  std::vector<Forest> out;
  for (std::size_t first = 1; first <= n; ++first) {
    for (const auto& t : trees_of_size(first, labels)) {
      for (const auto& rest : forests_of_size(n - first, labels)) {
        Forest f{t};
        f.insert(f.end(), rest.begin(), rest.end());
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

inline std::vector<LabeledTree> trees_of_size(std::size_t n, const std::vector<std::string>& labels) {
  std::vector<LabeledTree> out;
  for (const auto& l : labels) {
    for (auto& kids : forests_of_size(n - 1, labels)) out.push_back({l, kids});
  }
  return out;
}

inline PricePanel panel_from_closes(const Matrix& close) {
  const std::size_t n = close.rows();
  const std::size_t m = close.cols();
  Matrix volume(n, m, 1000.0);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      if (is_missing(close(t, i))) volume(t, i) = kMissing;
    }
  }
  PricePanel::Columns c{close, close, close, close, volume, {}};
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < m; ++i) ids.push_back("X" + std::to_string(100 + i));
  return PricePanel(TradingCalendar(MarketId::UsLike,
                                    weekday_calendar(Date::from_ymd(2023, 1, 2), n)),
                    ids, std::move(c));
}

inline Matrix random_closes(std::size_t n, std::size_t m, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> step(-0.04, 0.04);
  Matrix c(n, m);
  for (std::size_t i = 0; i < m; ++i) {
    double px = 30.0;
    for (std::size_t t = 0; t < n; ++t) {
      px *= 1 + step(rng);
      c(t, i) = px;
    }
  }
  return c;
}

inline double loop_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  double cov = 0, vx = 0, vy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - sx / n) * (y[i] - sy / n);
    vx += (x[i] - sx / n) * (x[i] - sx / n);
    vy += (y[i] - sy / n) * (y[i] - sy / n);
  }
  return cov / std::sqrt(vx * vy);
}

inline std::vector<double> random_curve(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z(0.0005, 0.015);
  std::vector<double> v{1e6};
  for (std::size_t i = 1; i < n; ++i) v.push_back(v.back() * (1.0 + z(rng)));
  return v;
}

inline double mdd_oracle(const std::vector<double>& v) {
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i; j < v.size(); ++j) worst = std::min(worst, (v[j] - v[i]) / v[i]);
  return worst;
}

/// Cash replayed from FILLED log rows in log order.
inline double replay_cash(double initial, const std::vector<TradeRecord>& log) {
  double cash = initial;
  for (const auto& r : log) {
    if (r.status != OrderStatus::Filled) continue;
    const double value = static_cast<double>(r.qty) * r.price;
    if (r.side == Side::Buy || r.side == Side::Cover) {
      cash -= value + r.commission;
    } else {
      cash += value - r.commission;
    }
  }
  return cash;
}

}  // namespace alphaloop::testing
