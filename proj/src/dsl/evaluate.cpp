#include "alphaloop/dsl/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/stats.hpp"

namespace alphaloop::dsl {

namespace {

template <typename F>
Matrix map_unary(const Matrix& x, F f) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double v = x(t, i);
      if (!is_missing(v)) out(t, i) = f(v);
    }
  }
  return out;
}

template <typename F>
Matrix map_binary(const Matrix& a, const Matrix& b, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t t = 0; t < a.rows(); ++t) {
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double x = a(t, i);
      const double y = b(t, i);
      if (!is_missing(x) && !is_missing(y)) out(t, i) = f(x, y);
    }
  }
  return out;
}

/// Applies f to each complete trailing window of length w; any missing value
/// in the window leaves the output missing.
template <typename F>
Matrix rolling(const Matrix& x, std::size_t w, F f) {
  Matrix out(x.rows(), x.cols());
  std::vector<double> buf(w);
  for (std::size_t i = 0; i < x.cols(); ++i) {
    for (std::size_t t = w - 1; t < x.rows(); ++t) {
      bool complete = true;
      for (std::size_t k = 0; k < w; ++k) {
        buf[k] = x(t + 1 - w + k, i);
        if (is_missing(buf[k])) {
          complete = false;
          break;
        }
      }
      if (complete) out(t, i) = f(buf);
    }
  }
  return out;
}

double ts_rank_value(const std::vector<double>& win) {
  const double cur = win.back();
  double below = 0.0;
  double equal = 0.0;
  for (double v : win) {
    if (v < cur) below += 1.0;
    else if (v == cur) equal += 1.0;
  }
  const double rank = below + (equal + 1.0) / 2.0;  // 1-based average rank
  return (rank - 1.0) / static_cast<double>(win.size() - 1);
}

Matrix ts_corr(const Matrix& a, const Matrix& b, std::size_t w) {
  Matrix out(a.rows(), a.cols());
  std::vector<double> xs(w), ys(w);
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t t = w - 1; t < a.rows(); ++t) {
      bool complete = true;
      for (std::size_t k = 0; k < w && complete; ++k) {
        xs[k] = a(t + 1 - w + k, i);
        ys[k] = b(t + 1 - w + k, i);
        complete = !is_missing(xs[k]) && !is_missing(ys[k]);
      }
      if (!complete) continue;
      if (const auto r = stats::pearson(xs, ys)) out(t, i) = *r;
    }
  }
  return out;
}

Matrix ts_delta(const Matrix& x, std::size_t w) {
  Matrix out(x.rows(), x.cols());
  for (std::size_t t = w; t < x.rows(); ++t) {
    for (std::size_t i = 0; i < x.cols(); ++i) {
      const double now = x(t, i);
      const double then = x(t - w, i);
      if (!is_missing(now) && !is_missing(then)) out(t, i) = now - then;
    }
  }
  return out;
}

/// Present cells of row t as (column, value).
std::vector<std::pair<std::size_t, double>> present(const Matrix& m, std::size_t t) {
  std::vector<std::pair<std::size_t, double>> cells;
  for (std::size_t i = 0; i < m.cols(); ++i) {
    if (!is_missing(m(t, i))) cells.emplace_back(i, m(t, i));
  }
  return cells;
}

void clear_row(Matrix& m, std::size_t t) {
  for (auto& v : m.row(t)) v = kMissing;
}

bool any_row_has_two(const Matrix& m) {
  for (std::size_t t = 0; t < m.rows(); ++t) {
    std::size_t n = 0;
    for (double v : m.row(t)) n += !is_missing(v);
    if (n >= 2) return true;
  }
  return false;
}

class Evaluator {
 public:
  explicit Evaluator(const PricePanel& panel) : panel_(panel) {}

  Matrix eval(const Expr& e) {
    const Op op = e.op();
    switch (op) {
      case Op::Field: return field(e.node().field);
      case Op::Number:
        return Matrix(panel_.num_days(), panel_.num_assets(), e.node().number);
      case Op::Placeholder:
        throw Error(ErrorCode::ArityError, "cannot evaluate a canonicalized expression");
      case Op::Abs: return map_unary(eval(e.args()[0]), [](double v) { return std::abs(v); });
      case Op::Log:
        return map_unary(eval(e.args()[0]),
                         [](double v) { return v > 0.0 ? std::log(v) : kMissing; });
      case Op::Sign:
        return map_unary(eval(e.args()[0]),
                         [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
      case Op::Neg: return map_unary(eval(e.args()[0]), [](double v) { return -v; });
      case Op::Add:
        return map_binary(eval(e.args()[0]), eval(e.args()[1]),
                          [](double a, double b) { return a + b; });
      case Op::Sub:
        return map_binary(eval(e.args()[0]), eval(e.args()[1]),
                          [](double a, double b) { return a - b; });
      case Op::Mul:
        return map_binary(eval(e.args()[0]), eval(e.args()[1]),
                          [](double a, double b) { return a * b; });
      case Op::Div:
        return map_binary(eval(e.args()[0]), eval(e.args()[1]),
                          [](double a, double b) { return b == 0.0 ? kMissing : a / b; });
      default: break;
    }
    if (op_kind(op) == OpKind::TimeSeries) return time_series(e);
    return cross_section(e);
  }

 private:
  Matrix field(Field f) {
    Matrix out = panel_.field(f);
    if (panel_.has_universe()) {
      for (std::size_t t = 0; t < out.rows(); ++t) {
        for (std::size_t i = 0; i < out.cols(); ++i) {
          if (!panel_.is_member(t, i)) out(t, i) = kMissing;
        }
      }
    }
    return out;
  }

  Matrix time_series(const Expr& e) {
    const auto w = static_cast<std::size_t>(e.window());
    const Matrix x = eval(e.args()[0]);
    switch (e.op()) {
      case Op::TsMean:
        return rolling(x, w, [](const std::vector<double>& v) { return stats::mean(v); });
      case Op::TsStd:
        return rolling(x, w, [](const std::vector<double>& v) { return stats::sample_std(v); });
      case Op::TsMin:
        return rolling(x, w,
                       [](const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); });
      case Op::TsMax:
        return rolling(x, w,
                       [](const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); });
      case Op::TsSum:
        return rolling(x, w, [](const std::vector<double>& v) {
          double s = 0.0;
          for (double d : v) s += d;
          return s;
        });
      case Op::TsRank: return rolling(x, w, ts_rank_value);
      case Op::TsDelta: return ts_delta(x, w);
      case Op::TsCorr: return ts_corr(x, eval(e.args()[1]), w);
      default: break;
    }
    throw Error(ErrorCode::UnknownFunction, "not a time-series operator");
  }

  Matrix cross_section(const Expr& e) {
    Matrix x = eval(e.args()[0]);
    if (!any_row_has_two(x)) {
      throw Error(ErrorCode::EmptyCrossSection,
                  std::string(op_name(e.op())) + " has no day with two or more values");
    }
    switch (e.op()) {
      case Op::CsRank: cs_rank_rows(x); break;
      case Op::CsZscore: cs_zscore_rows(x); break;
      case Op::CsWinsorize: cs_winsorize_rows(x, e.args()[1].node().number); break;
      default: throw Error(ErrorCode::UnknownFunction, "not a cross-section operator");
    }
    return x;
  }

  const PricePanel& panel_;
};

}  // namespace

void cs_rank_rows(Matrix& m) {
  for (std::size_t t = 0; t < m.rows(); ++t) {
    const auto cells = present(m, t);
    if (cells.size() < 2) {
      clear_row(m, t);
      continue;
    }
    std::vector<double> vals;
    for (const auto& c : cells) vals.push_back(c.second);
    const auto ranks = stats::average_ranks(vals);
    const double denom = static_cast<double>(cells.size() - 1);
    for (std::size_t k = 0; k < cells.size(); ++k) m(t, cells[k].first) = (ranks[k] - 1.0) / denom;
  }
}

void cs_zscore_rows(Matrix& m) {
  for (std::size_t t = 0; t < m.rows(); ++t) {
    const auto cells = present(m, t);
    if (cells.size() < 2) {
      clear_row(m, t);
      continue;
    }
    std::vector<double> vals;
    for (const auto& c : cells) vals.push_back(c.second);
    const double mu = stats::mean(vals);
    const double sd = stats::sample_std(vals);
    for (const auto& [i, v] : cells) m(t, i) = sd > 0.0 ? (v - mu) / sd : 0.0;
  }
}

void cs_winsorize_rows(Matrix& m, double p) {
  for (std::size_t t = 0; t < m.rows(); ++t) {
    const auto cells = present(m, t);
    if (cells.size() < 2) {
      clear_row(m, t);
      continue;
    }
    std::vector<double> vals;
    for (const auto& c : cells) vals.push_back(c.second);
    const double lo = stats::quantile(vals, p);
    const double hi = stats::quantile(vals, 1.0 - p);
    for (const auto& [i, v] : cells) m(t, i) = std::clamp(v, lo, hi);
  }
}

Matrix evaluate(const Expr& e, const PricePanel& panel) { return Evaluator(panel).eval(e); }

}  // namespace alphaloop::dsl
