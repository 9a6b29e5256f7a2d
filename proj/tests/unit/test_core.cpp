#include <cmath>

#include "alphaloop/core/date.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/core/matrix.hpp"
#include "alphaloop/core/stats.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace alphaloop;

TEST_CASE("date parse and format round trip") {
  const auto d = Date::parse("2024-02-29");
  REQUIRE(d);
  CHECK(d->to_string() == "2024-02-29");
  CHECK_FALSE(Date::parse("2023-02-29"));
  CHECK_FALSE(Date::parse("2024-2-01"));
  CHECK_FALSE(Date::parse("2024-01-01x"));
  CHECK(Date::from_ymd(1970, 1, 1).serial() == 0);
  CHECK(Date::from_ymd(1970, 1, 1).weekday() == 3);  // Thursday
  CHECK((*d + 1).to_string() == "2024-03-01");
}

TEST_CASE("matrix rows_between and identical") {
  Matrix m(3, 2, 1.0);
  m(1, 0) = kMissing;
  const Matrix sub = m.rows_between(1, 2);
  CHECK(sub.rows() == 2);
  CHECK(is_missing(sub(0, 0)));
  CHECK(identical(m.rows_between(0, 2), m));
  CHECK(m.count_present() == 5);
}

TEST_CASE("stats against scalar loops") {
  const std::vector<double> x = {1, 2, 3, 4, 5};
  const std::vector<double> y = {2, 1, 4, 3, 6};
  CHECK(stats::mean(x) == doctest::Approx(3.0));
  CHECK(stats::sample_std(x) == doctest::Approx(std::sqrt(2.5)));
  double sxy = 0, sxx = 0, syy = 0;
  for (int i = 0; i < 5; ++i) {
    sxy += (x[i] - 3) * (y[i] - 3.2);
    sxx += (x[i] - 3) * (x[i] - 3);
    syy += (y[i] - 3.2) * (y[i] - 3.2);
  }
  CHECK(*stats::pearson(x, y) == doctest::Approx(sxy / std::sqrt(sxx * syy)));
  CHECK_FALSE(stats::pearson(x, std::vector<double>(5, 1.0)));
  const auto r = stats::average_ranks(std::vector<double>{3, 1, 3, 2});
  CHECK(r == std::vector<double>{3.5, 1, 3.5, 2});
  CHECK(stats::quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(stats::quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  const auto fit = stats::ols(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5});
  REQUIRE(fit);
  CHECK(fit->slope == doctest::Approx(2.0));
  CHECK(fit->intercept == doctest::Approx(1.0));
}

TEST_CASE("io helpers") {
  CHECK(io::split(" a, b ,c", ',') == std::vector<std::string>{"a", "b", "c"});
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::parse_double("1e-3").value() == 0.001);
  CHECK_FALSE(io::parse_double("abc"));
  CHECK(io::hex64(io::fnv1a64("")) == "cbf29ce484222325");
  testing::TempDir dir;
  io::write_file_atomic(dir.path() / "x.txt", "hello");
  CHECK(io::read_file(dir.path() / "x.txt") == "hello");
  CHECK_THROWS_AS(io::read_file(dir.path() / "missing"), Error);
}

TEST_CASE("error carries code") {
  try {
    throw Error(ErrorCode::BadWindow, "w=1");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadWindow);
    CHECK(std::string(e.what()).find("BadWindow") != std::string::npos);
  }
}
