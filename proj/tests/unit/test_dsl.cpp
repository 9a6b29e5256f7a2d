#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>
#include <random>
#include <unordered_map>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/core/stats.hpp"
#include "alphaloop/dsl/diversity.hpp"
#include "alphaloop/dsl/evaluate.hpp"
#include "alphaloop/dsl/parser.hpp"
#include "alphaloop/dsl/reference.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace alphaloop;
using namespace alphaloop::dsl;
using namespace alphaloop::testing;

namespace {

ErrorCode parse_code(const std::string& text) {
  try {
    parse(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a parse failure for " << text);
  return ErrorCode::IoError;
}

PricePanel make_panel(std::size_t days, std::size_t assets, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> step(-0.03, 0.03);
  std::uniform_real_distribution<double> vol(1e5, 1e6);
  PricePanel::Columns c{Matrix(days, assets), Matrix(days, assets), Matrix(days, assets),
                        Matrix(days, assets), Matrix(days, assets), {}};
  c.fundamentals.emplace(Field::Pe, Matrix(days, assets));
  for (std::size_t i = 0; i < assets; ++i) {
    double px = 20.0 + static_cast<double>(i);
    for (std::size_t t = 0; t < days; ++t) {
      const double open = px;
      px *= 1.0 + step(rng);
      c.open(t, i) = open;
      c.close(t, i) = px;
      c.high(t, i) = std::max(open, px) * 1.01;
      c.low(t, i) = std::min(open, px) * 0.99;
      c.volume(t, i) = vol(rng);
      c.fundamentals[Field::Pe](t, i) = 5.0 + static_cast<double>(i);
    }
  }
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < assets; ++i) ids.push_back("A" + std::to_string(10 + i));
  return PricePanel(TradingCalendar(MarketId::UsLike,
                                    weekday_calendar(Date::from_ymd(2022, 1, 3), days)),
                    ids, std::move(c));
}

PricePanel closes_panel(const std::vector<std::vector<double>>& closes) {
  const std::size_t n = closes.size();
  const std::size_t m = closes[0].size();
  PricePanel::Columns c{Matrix(n, m), Matrix(n, m), Matrix(n, m), Matrix(n, m), Matrix(n, m), {}};
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t i = 0; i < m; ++i) {
      c.open(t, i) = c.high(t, i) = c.low(t, i) = c.close(t, i) = closes[t][i];
      c.volume(t, i) = 1;
    }
  }
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < m; ++i) ids.push_back(std::string(1, static_cast<char>('a' + i)));
  return PricePanel(TradingCalendar(MarketId::UsLike,
                                    weekday_calendar(Date::from_ymd(2022, 1, 3), n)),
                    ids, std::move(c));
}

}  // namespace

TEST_CASE("parse structural examples") {
  const Expr e = parse("cs_rank(ts_delta(close,5))");
  CHECK(e.depth() == 3);
  CHECK(e.op() == Op::CsRank);
  CHECK(e.args()[0].op() == Op::TsDelta);
  CHECK(e.args()[0].args()[0].op() == Op::Field);
  CHECK(e.args()[0].window() == 5);

  const Expr leaf = parse("close");
  CHECK(leaf.op() == Op::Field);
  CHECK(leaf.size() == 1);

  CHECK(print(parse("  div( 1 , pe )")) == "div(1,pe)");
  CHECK(print(parse("mul(-1.5,close)")) == "mul(-1.5,close)");
}

TEST_CASE("parse errors") {
  CHECK(parse_code("ts_mean(close)") == ErrorCode::ArityError);
  CHECK(parse_code("ts_mean(close,1)") == ErrorCode::BadWindow);
  CHECK(parse_code("ts_mean(close,2.5)") == ErrorCode::BadWindow);
  CHECK(parse_code("ts_mean(close,volume)") == ErrorCode::BadWindow);
  CHECK(parse_code("cs_winsorize(close,0.5)") == ErrorCode::BadWindow);
  CHECK(parse_code("foo(close)") == ErrorCode::UnknownFunction);
  CHECK(parse_code("price") == ErrorCode::UnknownField);
  CHECK(parse_code("Close") == ErrorCode::SyntaxError);
  CHECK(parse_code("ts_mean(close,5") == ErrorCode::SyntaxError);
  CHECK(parse_code("") == ErrorCode::SyntaxError);
  CHECK(parse_code("close close") == ErrorCode::SyntaxError);
  try {
    parse("add(close,,open)");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 10);
    CHECK(e.expected() == std::vector<std::string>{"identifier", "number"});
  }
}

TEST_CASE("print parse round trip on random expressions") {
  std::mt19937 rng(11);
  for (int k = 0; k < 500; ++k) {
    const Expr e = random_expr(rng, 4);
    const std::string s = print(e);
    CHECK_MESSAGE(parse(s) == e, s);
    CHECK(print(parse(s)) == s);
  }
}

TEST_CASE("evaluate identity and ts_mean example") {
  const auto p = closes_panel({{100}, {110}, {120}});
  CHECK(identical(evaluate(parse("close"), p), p.close()));
  const auto m = evaluate(parse("ts_mean(close,2)"), p);
  CHECK(is_missing(m(0, 0)));
  CHECK(m(1, 0) == doctest::Approx(105));
  CHECK(m(2, 0) == doctest::Approx(115));
}

TEST_CASE("cs_rank against a sort oracle") {
  const auto p = closes_panel({{3, 1, 2}, {5, 5, 1}});
  const auto r = evaluate(parse("cs_rank(close)"), p);
  CHECK(r(0, 0) == 1.0);
  CHECK(r(0, 1) == 0.0);
  CHECK(r(0, 2) == 0.5);
  // ties share the average position
  CHECK(r(1, 0) == 0.75);
  CHECK(r(1, 1) == 0.75);
  CHECK(r(1, 2) == 0.0);

  const auto big = make_panel(30, 12, 3);
  const auto ranks = evaluate(parse("cs_rank(ts_delta(close,3))"), big);
  for (std::size_t t = 3; t < 30; ++t) {
    std::vector<std::pair<double, std::size_t>> sorted;
    const auto d = evaluate(parse("ts_delta(close,3)"), big);
    for (std::size_t i = 0; i < 12; ++i) sorted.emplace_back(d(t, i), i);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t k = 0; k < 12; ++k) {
      CHECK(ranks(t, sorted[k].second) == doctest::Approx(static_cast<double>(k) / 11.0));
    }
  }
}

TEST_CASE("time-series operators against scalar loops") {
  const auto p = make_panel(40, 3, 5);
  const Matrix& c = p.close();
  const Matrix& v = p.field(Field::Volume);
  const auto mean = evaluate(parse("ts_mean(close,5)"), p);
  const auto sd = evaluate(parse("ts_std(close,5)"), p);
  const auto mn = evaluate(parse("ts_min(close,5)"), p);
  const auto mx = evaluate(parse("ts_max(close,5)"), p);
  const auto sum = evaluate(parse("ts_sum(close,5)"), p);
  const auto rk = evaluate(parse("ts_rank(close,5)"), p);
  const auto dl = evaluate(parse("ts_delta(close,5)"), p);
  const auto cr = evaluate(parse("ts_corr(close,volume,5)"), p);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t t = 0; t < 4; ++t) {
      CHECK(is_missing(mean(t, i)));
      CHECK(is_missing(dl(t, i)));
    }
    CHECK(is_missing(dl(4, i)));
    for (std::size_t t = 4; t < 40; ++t) {
      double s = 0, lo = 1e300, hi = -1e300;
      for (std::size_t k = t - 4; k <= t; ++k) {
        s += c(k, i);
        lo = std::min(lo, c(k, i));
        hi = std::max(hi, c(k, i));
      }
      double ss = 0;
      for (std::size_t k = t - 4; k <= t; ++k) ss += (c(k, i) - s / 5) * (c(k, i) - s / 5);
      CHECK(mean(t, i) == doctest::Approx(s / 5));
      CHECK(sum(t, i) == doctest::Approx(s));
      CHECK(sd(t, i) == doctest::Approx(std::sqrt(ss / 4)));
      CHECK(mn(t, i) == lo);
      CHECK(mx(t, i) == hi);
      int below = 0;
      for (std::size_t k = t - 4; k < t; ++k) below += c(k, i) < c(t, i);
      CHECK(rk(t, i) == doctest::Approx(below / 4.0));
      double mx_ = 0, my = 0;
      for (std::size_t k = t - 4; k <= t; ++k) {
        mx_ += c(k, i) / 5;
        my += v(k, i) / 5;
      }
      double sxy = 0, sxx = 0, syy = 0;
      for (std::size_t k = t - 4; k <= t; ++k) {
        sxy += (c(k, i) - mx_) * (v(k, i) - my);
        sxx += (c(k, i) - mx_) * (c(k, i) - mx_);
        syy += (v(k, i) - my) * (v(k, i) - my);
      }
      CHECK(cr(t, i) == doctest::Approx(sxy / std::sqrt(sxx * syy)));
      if (t >= 5) CHECK(dl(t, i) == doctest::Approx(c(t, i) - c(t - 5, i)));
    }
  }
}

TEST_CASE("degenerate cells become missing") {
  const auto p = closes_panel({{1, 2}, {1, 2}});
  const auto d = evaluate(parse("div(close,sub(close,close))"), p);
  CHECK(is_missing(d(0, 0)));
  const auto l = evaluate(parse("log(sub(close,2))"), p);
  CHECK(is_missing(l(0, 0)));
  CHECK(is_missing(l(0, 1)));
  const auto s = evaluate(parse("sign(sub(close,2))"), p);
  CHECK(s(0, 0) == -1.0);
  CHECK(s(0, 1) == 0.0);
}

TEST_CASE("cross-section errors and fields") {
  const auto one = closes_panel({{1}, {2}});
  try {
    evaluate(parse("cs_rank(close)"), one);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCrossSection);
  }
  try {
    evaluate(parse("div(1,pb)"), one);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownField);
  }
}

TEST_CASE("cs_zscore moments and winsorize bounds") {
  const auto p = make_panel(60, 15, 9);
  const auto z = evaluate(parse("cs_zscore(ts_delta(close,2))"), p);
  for (std::size_t t = 2; t < 60; ++t) {
    std::vector<double> row(z.row(t).begin(), z.row(t).end());
    CHECK(std::abs(stats::mean(row)) < 1e-9);
    CHECK(std::abs(stats::sample_std(row) - 1.0) < 1e-9);
  }
  const auto flat = closes_panel({{4, 4, 4}});
  Matrix m = flat.close();
  cs_zscore_rows(m);
  CHECK(m(0, 0) == 0.0);

  const auto w = evaluate(parse("cs_winsorize(volume,0.1)"), p);
  for (std::size_t t = 0; t < 60; ++t) {
    std::vector<double> raw(p.field(Field::Volume).row(t).begin(), p.field(Field::Volume).row(t).end());
    const double lo = stats::quantile(raw, 0.1);
    const double hi = stats::quantile(raw, 0.9);
    for (std::size_t i = 0; i < 15; ++i) {
      CHECK(w(t, i) >= lo);
      CHECK(w(t, i) <= hi);
      if (raw[i] >= lo && raw[i] <= hi) CHECK(w(t, i) == raw[i]);
    }
  }
}

TEST_CASE("evaluation is pure") {
  const auto p = make_panel(50, 8, 1);
  const Expr e = parse("neg(ts_corr(cs_rank(close),cs_rank(volume),20))");
  CHECK(identical(evaluate(e, p), evaluate(e, p)));
}

TEST_CASE("canonicalize erases literals") {
  CHECK(canonicalize(parse("ts_mean(close,5)")) == canonicalize(parse("ts_mean(close,20)")));
  CHECK(print(canonicalize(parse("ts_mean(close,5)"))) == "ts_mean(close,#)");
  const Expr plain = parse("add(close,open)");
  CHECK(canonicalize(plain) == plain);
  CHECK(nted(parse("ts_corr(close,volume,10)"), parse("ts_corr(close,volume,30)")) == 0.0);
}

TEST_CASE("nted examples and properties") {
  CHECK(nted(parse("close"), parse("close")) == 0.0);
  CHECK(nted(parse("close"), parse("volume")) == 0.5);
  std::mt19937 rng(21);
  for (int k = 0; k < 300; ++k) {
    const Expr a = random_expr(rng, 4);
    const Expr b = random_expr(rng, 4);
    const double d = nted(a, b);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == nted(b, a));
    CHECK(nted(a, a) == 0.0);
  }
}

TEST_CASE("tree edit distance matches exhaustive search on trees up to four nodes") {
  const std::vector<std::string> labels = {"a", "b", "c"};
  std::vector<LabeledTree> all;
  for (std::size_t n = 1; n <= 4; ++n) {
    for (auto& t : trees_of_size(n, labels)) all.push_back(std::move(t));
  }
  REQUIRE(all.size() == 3 + 9 + 54 + 405);
  std::size_t compared = 0;
  for (const auto& a : all) {
    const auto dist = bfs_all(a, labels, 4);
    for (const auto& b : all) {
      const auto it = dist.find(encode(Forest{b}));
      REQUIRE(it != dist.end());
      if (tree_edit_distance(a, b) != it->second) {
        FAIL("mismatch " << encode(Forest{a}) << " vs " << encode(Forest{b}));
      }
      ++compared;
    }
  }
  CHECK(compared == all.size() * all.size());
}

TEST_CASE("phi_intra and phi_inter") {
  const Expr close = parse("close");
  const Expr volume = parse("volume");
  CHECK(phi_intra({close, close}) == 0.0);
  CHECK(phi_intra({close, volume}) == 0.5);
  const std::vector<Expr> lib = {parse("ts_mean(close,5)"), parse("cs_rank(volume)"),
                                 parse("div(sub(high,low),close)")};
  double pair_sum = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      if (i < j) pair_sum += nted(lib[i], lib[j]);
    }
  }
  CHECK(phi_intra(lib) == doctest::Approx(pair_sum / 3));
  try {
    phi_intra({close});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooFewFactors);
  }

  const auto ref = expressions(classical_reference());
  CHECK(phi_inter({ref[0], ref[3]}, ref) == 0.0);
  CHECK(phi_inter({close}, {volume}) == 0.5);
  double oracle = 0;
  for (const auto& a : lib) {
    std::vector<double> row;
    for (const auto& b : ref) row.push_back(nted(a, b));
    oracle += *std::min_element(row.begin(), row.end());
  }
  CHECK(phi_inter(lib, ref) == doctest::Approx(oracle / 3));
  try {
    phi_inter(lib, {});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyReference);
  }
}

TEST_CASE("classical reference file matches the built-in set") {
  const auto& builtin = classical_reference();
  CHECK(builtin.size() == 20);
  const auto loaded = load_reference(std::string(ALPHALOOP_DATA_DIR) + "/classical_factors.txt");
  REQUIRE(loaded.size() == builtin.size());
  std::map<std::string, int> per_category;
  for (std::size_t i = 0; i < builtin.size(); ++i) {
    CHECK(loaded[i].expr == builtin[i].expr);
    CHECK(loaded[i].category == builtin[i].category);
    ++per_category[builtin[i].category];
  }
  CHECK(per_category.size() == 5);
}
