#include <cmath>
#include <random>

#include "alphaloop/exchange/exchange.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace alphaloop;
using namespace alphaloop::exchange;
using namespace alphaloop::testing;

namespace {

Date day(int k) { return Date::from_ymd(2024, 1, 1) + k; }

OrderRequest market(const std::string& a, Side s, long long q) { return {a, s, q, std::nullopt}; }

}  // namespace

TEST_CASE("profiles") {
  const auto csi = MarketProfile::csi();
  CHECK(csi.settlement == Settlement::TPlus1);
  CHECK_FALSE(csi.allow_short);
  CHECK(csi.lot_size == 100);
  CHECK(csi.commission_rate == 0.0002);
  CHECK(csi.days_per_year == 243);
  CHECK(csi.rf_annual == 0.0125);
  const auto us = MarketProfile::us();
  CHECK(us.settlement == Settlement::TPlus0);
  CHECK(us.allow_short);
  CHECK(us.lot_size == 1);
  CHECK(us.commission_rate == 0.0001);
  CHECK(us.initial_margin_rate == 0.20);
  CHECK(us.maintenance_ratio == 0.80);
  CHECK(us.days_per_year == 252);
  CHECK(us.rf_annual == 0.0381);
}

TEST_CASE("CSI T+1 and board lots") {
  Exchange ex(MarketProfile::csi(), 10'000'000);
  ex.begin_day(day(0));
  const auto lot = ex.submit_order(market("A", Side::Buy, 150), 10.0);
  CHECK(lot.error == ErrorCode::LotViolation);
  CHECK(ex.submit_order(market("A", Side::Short, 100), 10.0).error == ErrorCode::ShortNotAllowed);
  REQUIRE(ex.submit_order(market("A", Side::Buy, 100), 10.0).ok());
  ex.settle_day({{"A", 10.0}});
  CHECK(ex.account().longs.at("A").qty == 100);
  CHECK(ex.account().longs.at("A").available == 0);
  CHECK(ex.submit_order(market("A", Side::Sell, 100), 10.0).error ==
        ErrorCode::InsufficientAvailableShares);
  ex.begin_day(day(1));
  CHECK(ex.account().longs.at("A").available == 100);
  REQUIRE(ex.submit_order(market("A", Side::Sell, 100), 10.0).ok());
  CHECK(ex.submit_order(market("A", Side::Sell, 100), 10.0).error ==
        ErrorCode::InsufficientAvailableShares);
  ex.settle_day({{"A", 11.0}});
  CHECK(ex.account().longs.empty());
}

TEST_CASE("commission to the cent") {
  Exchange csi(MarketProfile::csi(), 2'000'000);
  csi.begin_day(day(0));
  REQUIRE(csi.submit_order(market("A", Side::Buy, 100'000), 10.0).ok());
  const auto rep = csi.settle_day({{"A", 10.0}});
  REQUIRE(rep.fills.size() == 1);
  CHECK(std::abs(rep.fills[0].commission - 200.0) < 0.005);
  CHECK(csi.account().cash == 2'000'000 - 1'000'000 - rep.fills[0].commission);

  Exchange us(MarketProfile::us(), 2'000'000);
  us.begin_day(day(0));
  REQUIRE(us.submit_order(market("B", Side::Buy, 12'345), 37.21).ok());
  const auto r2 = us.settle_day({{"B", 37.21}});
  CHECK(std::abs(r2.fills[0].commission - 12'345 * 37.21 * 0.0001) < 0.005);
  CHECK(std::round(r2.fills[0].commission * 100) == std::round(12'345 * 37.21 * 0.01));
}

TEST_CASE("limit orders expire on day 7 and purge on day 14") {
  Exchange ex(MarketProfile::csi(), 1'000'000);
  ex.begin_day(day(0));
  const auto id = ex.submit_order({"A", Side::Buy, 100, 95.0}, 100.0);
  REQUIRE(id.ok());
  for (int k = 0; k < 6; ++k) {
    if (k > 0) ex.begin_day(day(k));
    const auto rep = ex.settle_day({{"A", 100.0}});
    CHECK(rep.expired.empty());
    CHECK(ex.orders().front().status == OrderStatus::Pending);
    CHECK(ex.orders().front().age_days <= 6);
  }
  ex.begin_day(day(6));
  const auto rep7 = ex.settle_day({{"A", 100.0}});
  REQUIRE(rep7.expired.size() == 1);
  CHECK(rep7.expired[0] == *id.id);
  CHECK(ex.orders().front().status == OrderStatus::Expired);
  for (int k = 7; k < 13; ++k) {
    ex.begin_day(day(k));
    ex.settle_day({{"A", 100.0}});
    CHECK(ex.orders().size() == 1);
  }
  ex.begin_day(day(13));
  ex.settle_day({{"A", 100.0}});
  CHECK(ex.orders().empty());
}

TEST_CASE("limit fills when the close satisfies it and missing bars wait") {
  Exchange ex(MarketProfile::us(), 1'000'000);
  ex.begin_day(day(0));
  REQUIRE(ex.submit_order({"A", Side::Buy, 10, 95.0}, 100.0).ok());
  ex.settle_day({});
  CHECK(ex.orders().front().status == OrderStatus::Pending);
  ex.begin_day(day(1));
  const auto rep = ex.settle_day({{"A", 94.0}});
  REQUIRE(rep.fills.size() == 1);
  CHECK(rep.fills[0].price == 94.0);
}

TEST_CASE("US short reserves initial margin") {
  Exchange ex(MarketProfile::us(), 10'000'000);
  ex.begin_day(day(0));
  REQUIRE(ex.submit_order(market("S", Side::Short, 10'000), 100.0).ok());
  ex.settle_day({{"S", 100.0}});
  CHECK(ex.account().reserved_margin == 200'000.0);
  CHECK(ex.account().shorts.at("S").qty == 10'000);
  CHECK(ex.account().cash == 10'000'000 + 1'000'000 - 100.0);
  const PriceMap px{{"S", 100.0}};
  CHECK(ex.nav(px) == doctest::Approx(10'000'000 - 100.0));
  ex.begin_day(day(1));
  REQUIRE(ex.submit_order(market("S", Side::Cover, 4'000), 100.0).ok());
  ex.settle_day({{"S", 100.0}});
  CHECK(ex.account().reserved_margin == doctest::Approx(120'000.0));
  CHECK(ex.submit_order(market("S", Side::Cover, 7'000), 100.0).error ==
        ErrorCode::InsufficientAvailableShares);
}

TEST_CASE("maintenance margin forces covers") {
  MarketProfile p = MarketProfile::us();
  Exchange ex(p, 100'000);
  ex.begin_day(day(0));
  REQUIRE(ex.submit_order(market("S", Side::Short, 4'000), 100.0).ok());
  ex.settle_day({{"S", 100.0}});
  // price jumps: equity = cash - 4000*px falls below 0.8 * 80,000
  ex.begin_day(day(1));
  const auto rep = ex.settle_day({{"S", 123.0}});
  CHECK_FALSE(rep.margin_calls.empty());
  CHECK(ex.account().cash >= 0.0);
  const double equity = ex.nav({{"S", 123.0}});
  CHECK((ex.account().shorts.empty() || equity >= p.maintenance_ratio * ex.account().reserved_margin));
}

TEST_CASE("nav and net position rate") {
  Exchange ex(MarketProfile::us(), 10'000'000);
  CHECK(ex.nav({}) == 10'000'000);
  CHECK(ex.net_position_rate({}) == 0.0);
  MarketProfile zero = MarketProfile::us();
  zero.commission_rate = 0.0;
  Exchange b(zero, 5'000'000);
  b.begin_day(day(0));
  REQUIRE(b.submit_order(market("L", Side::Buy, 40'000), 100.0).ok());
  REQUIRE(b.submit_order(market("S", Side::Short, 10'000), 100.0).ok());
  b.settle_day({{"L", 100.0}, {"S", 100.0}});
  // cash 5M - 4M + 1M = 2M; long 4M; short 1M -> NAV 5M
  const PriceMap px{{"L", 100.0}, {"S", 100.0}};
  double oracle = b.account().cash;
  for (const auto& [a, pos] : b.account().longs) oracle += pos.qty * px.at(a);
  for (const auto& [a, pos] : b.account().shorts) oracle -= pos.qty * px.at(a);
  CHECK(b.nav(px) == oracle);
  CHECK(b.nav(px) == 5'000'000);
  CHECK(b.net_position_rate(px) == doctest::Approx(3.0 / 5.0));
  // round trip without commission leaves NAV unchanged
  b.begin_day(day(1));
  REQUIRE(b.submit_order(market("L", Side::Sell, 40'000), 100.0).ok());
  REQUIRE(b.submit_order(market("S", Side::Cover, 10'000), 100.0).ok());
  b.settle_day(px);
  CHECK(b.nav(px) == 5'000'000);
  CHECK_NOTHROW(ex.nav({}));
}

TEST_CASE("nav example cash 5M long 4M short 1M") {
  MarketProfile zero = MarketProfile::us();
  zero.commission_rate = 0.0;
  Exchange c(zero, 8'000'000);
  c.begin_day(day(0));
  REQUIRE(c.submit_order(market("L", Side::Buy, 40'000), 100.0).ok());
  REQUIRE(c.submit_order(market("S", Side::Short, 10'000), 100.0).ok());
  c.settle_day({{"L", 100.0}, {"S", 100.0}});
  const PriceMap px{{"L", 100.0}, {"S", 100.0}};
  CHECK(c.account().cash == 5'000'000);
  CHECK(c.nav(px) == 8'000'000);
  CHECK(c.net_position_rate(px) == 0.375);
  CHECK_THROWS_AS(c.nav({{"L", 100.0}}), Error);
}

TEST_CASE("non-positive nav") {
  MarketProfile zero = MarketProfile::us();
  Exchange b(zero, 100'000);
  b.begin_day(day(0));
  REQUIRE(b.submit_order(market("S", Side::Short, 1'000), 100.0).ok());
  b.settle_day({{"S", 100.0}});
  try {
    b.net_position_rate({{"S", 1'000.0}});
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveNav);
  }
}

TEST_CASE("random episodes keep the ledger balanced") {
  for (int episode = 0; episode < 1000; ++episode) {
    std::mt19937 rng(static_cast<unsigned>(episode));
    const bool csi = episode % 2 == 0;
    const MarketProfile prof = csi ? MarketProfile::csi() : MarketProfile::us();
    Exchange ex(prof, 1'000'000);
    const std::vector<std::string> assets = {"A", "B", "C"};
    PriceMap px{{"A", 20.0}, {"B", 50.0}, {"C", 8.0}};
    std::uniform_int_distribution<int> side_pick(0, 3), asset_pick(0, 2), lots(1, 40), coin(0, 9);
    std::normal_distribution<double> move(0.0, 0.03);
    for (int d = 0; d < 20; ++d) {
      ex.begin_day(day(d));
      const PriceMap ref = px;
      for (int k = 0; k < 4; ++k) {
        const Side s = static_cast<Side>(side_pick(rng));
        const auto& a = assets[static_cast<std::size_t>(asset_pick(rng))];
        long long q = lots(rng) * (csi ? 100 : 37);
        if (coin(rng) == 0) q += 1;  // occasional lot violation
        std::optional<double> limit;
        if (coin(rng) < 3) limit = ref.at(a) * (1.0 + move(rng));
        ex.submit_order({a, s, q, limit}, ref.at(a));
      }
      for (auto& [_, p] : px) p *= std::exp(move(rng));
      PriceMap bars = px;
      if (coin(rng) == 0) bars.erase("B");
      ex.settle_day(bars);
      const auto& acct = ex.account();
      REQUIRE(acct.cash >= 0.0);
      for (const auto& [_, pos] : acct.longs) {
        REQUIRE(pos.qty > 0);
        REQUIRE(pos.available <= pos.qty);
        REQUIRE(pos.available >= 0);
        if (csi) REQUIRE(pos.qty % 100 == 0);
      }
      if (csi) REQUIRE(acct.shorts.empty());
      for (const auto& [_, s] : acct.shorts) REQUIRE(s.qty > 0);
      for (const auto& o : ex.orders()) {
        if (o.status == OrderStatus::Pending) REQUIRE(o.age_days <= 6);
      }
    }
    REQUIRE(replay_cash(1'000'000, ex.trade_log()) == ex.account().cash);
    double fees = 0;
    for (const auto& r : ex.trade_log()) {
      if (r.status == OrderStatus::Filled) {
        fees += r.commission;
        if (csi) REQUIRE(r.qty % 100 == 0);
      }
    }
    REQUIRE(fees == doctest::Approx(ex.account().fee_paid_cumulative));
  }
}

TEST_CASE("same stream gives the same reports") {
  auto run = [] {
    Exchange ex(MarketProfile::us(), 500'000);
    std::string out;
    for (int d = 0; d < 5; ++d) {
      ex.begin_day(day(d));
      ex.submit_order(market("A", Side::Buy, 100 + d), 10.0 + d);
      ex.submit_order(market("B", Side::Short, 50), 20.0);
      ex.settle_day({{"A", 10.0 + d}, {"B", 20.0 - d}});
      out += ex.snapshot_json({{"A", 10.0 + d}, {"B", 20.0 - d}});
    }
    return out + trade_log_csv(ex.trade_log());
  };
  CHECK(run() == run());
  CHECK(trade_log_header() == "day,order_id,asset,side,qty,price,commission,status\n");
}
