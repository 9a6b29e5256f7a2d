#include <cmath>
#include <random>
#include <set>

#include "alphaloop/agents/memory.hpp"
#include "alphaloop/agents/miner.hpp"
#include "alphaloop/agents/regime.hpp"
#include "alphaloop/agents/run.hpp"
#include "alphaloop/agents/screener.hpp"
#include "alphaloop/agents/trader.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/dsl/parser.hpp"
#include "alphaloop/synthetic/generator.hpp"
#include "doctest.h"

using namespace alphaloop;
using namespace alphaloop::agents;

namespace {

synthetic::SyntheticSpec base_spec(int assets, int days, std::uint64_t seed) {
  synthetic::SyntheticSpec s;
  s.seed = seed;
  s.assets = assets;
  s.days = days;
  return s;
}

std::size_t count_kind(const MemoryStore& m, std::string_view kind, std::optional<Meta> meta) {
  std::size_t n = 0;
  for (const auto& e : m.log())
    if (e.kind == kind && e.meta == meta) ++n;
  return n;
}

RunConfig small_config(const PricePanel& p, std::size_t train_end, std::size_t valid_end) {
  RunConfig cfg;
  const auto& cal = p.calendar();
  cfg.train = {cal[0], cal[train_end]};
  cfg.valid = {cal[train_end + 1], cal[valid_end]};
  cfg.backtest = {cal[valid_end + 1], cal.back()};
  cfg.miner.windows = {5};
  cfg.miner.budget = 60;
  cfg.screener.min_factors = 1;
  cfg.trader.lookback = 40;
  return cfg;
}

}  // namespace

TEST_CASE("memory vocabulary and persistence") {
  for (const char* m : {"effective", "ineffective", "deprecated", "improved", "rejected",
                        "executed", "insufficient_factors", "empty_ensemble_skipped"}) {
    const auto parsed = parse_meta(m);
    REQUIRE(parsed.has_value());
    CHECK(to_string(*parsed) == m);
  }
  CHECK_FALSE(parse_meta("promoted").has_value());

  MemoryStore mem(3);
  const Date d = Date::from_ymd(2021, 3, 1);
  for (int i = 0; i < 5; ++i) {
    nlohmann::ordered_json p;
    p["factor_id"] = "f_" + std::to_string(i % 2);
    p["canonical"] = "ts_mean(close,#)";
    p["mean_ic"] = 0.01 * i;
    mem.append({d + i, "miner", "validation", i % 2 ? Meta::Effective : Meta::Ineffective, p});
  }
  CHECK(mem.size() == 5);
  CHECK(mem.recent().size() == 3);
  CHECK(mem.recent().front() == 2);
  CHECK(mem.factor_stats().at("f_1").validations == 2);
  CHECK(mem.factor_stats().at("f_1").times_effective == 2);
  CHECK(mem.factor_stats().at("f_0").last_mean_ic == doctest::Approx(0.04));
  CHECK(*mem.last_tried("ts_mean(close,#)") == d + 4);
  CHECK(mem.count("miner", Meta::Effective) == 2);

  const std::string dump = mem.dump();
  std::size_t line_start = 0;
  std::size_t i = 0;
  while (line_start < dump.size()) {
    const std::size_t nl = dump.find('\n', line_start);
    const std::string line = dump.substr(line_start, nl - line_start);
    const auto j = nlohmann::ordered_json::parse(line);
    std::vector<std::string> keys;
    for (const auto& [k, _] : j.items()) keys.push_back(k);
    CHECK(keys == std::vector<std::string>{"day", "agent", "kind", "meta", "payload"});
    const Event back = event_from_json(line);
    CHECK(to_json_line(back) == line);
    CHECK(back.day == mem.at(i).day);
    line_start = nl + 1;
    ++i;
  }
  CHECK(i == 5);
  CHECK_THROWS_AS(event_from_json(R"({"day":"2021-01-01","agent":"x","kind":"y","meta":"bogus","payload":{}})"),
                  Error);
}

TEST_CASE("regime scalar maps") {
  const double s0 = sigma0(252);
  CHECK(std::abs(s0 - 0.2 * std::sqrt(60.0 / 252.0)) < 1e-12);
  CHECK(std::abs(sigma0(243) - 0.2 * std::sqrt(60.0 / 243.0)) < 1e-12);
  CHECK(trend_value(0.0, s0) == 0.5);
  CHECK(label_name(Dimension::Trend, level_of(trend_value(0.0, s0))) == "range_bound");
  const double up = trend_value(s0, s0);
  CHECK(std::abs(up - 1.0 / (1.0 + std::exp(-1.0))) < 1e-12);
  CHECK(label_name(Dimension::Trend, level_of(up)) == "uptrend");
  CHECK(vol_value(0.1, 0.1, 0.3) == 0.0);
  CHECK(vol_value(0.3, 0.1, 0.3) == 1.0);
  CHECK(vol_value(0.5, 0.1, 0.3) == 1.0);
  CHECK(vol_value(0.0, 0.1, 0.3) == 0.0);
  CHECK(vol_value(0.2, 0.1, 0.3) == doctest::Approx(0.5));

  CHECK(level_of(0.125) == 0);
  CHECK(level_of(0.375) == 1);
  CHECK(level_of(0.875) == 3);
  CHECK(level_of(1.0) == 4);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng);
    int best = 0;
    for (int l = 1; l < 5; ++l)
      if (std::abs(v - 0.25 * l) < std::abs(v - 0.25 * best)) best = l;
    CHECK(level_of(v) == best);
  }
}

TEST_CASE("correlation proxy") {
  Matrix r(20, 3);
  for (std::size_t t = 0; t < 20; ++t) {
    const double x = std::sin(static_cast<double>(t));
    r(t, 0) = x;
    r(t, 1) = 2 * x + 1;
    r(t, 2) = -x;
  }
  CHECK(corr_value(r) == doctest::Approx(1.0));
  r(3, 2) = kMissing;
  CHECK(corr_value(r) == doctest::Approx(1.0));
  Matrix lone(20, 1, 0.1);
  CHECK(corr_value(lone) == 0.0);
}

TEST_CASE("regime assessor on a synthetic panel") {
  const auto p = synthetic::generate(base_spec(10, 200, 3));
  const RegimeAssessor a(p, 0, 99);
  CHECK_THROWS_AS(a.assess(59), Error);
  CHECK(a.q05() < a.q95());
  for (std::size_t t = 60; t < 200; ++t) {
    const auto r = a.assess(t);
    for (double v : {r.trend_value, r.vol_value, r.corr_value}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(r.trend_level == level_of(r.trend_value));
    CHECK(r.vol_level == level_of(r.vol_value));
    CHECK(r.corr_level == level_of(r.corr_value));
    const auto& c = p.index().close;
    CHECK(std::abs(r.trend_value - trend_value(std::log(c[t] / c[t - 60]), sigma0(252))) < 1e-15);
  }
  CHECK(assessments_csv({a.assess(80)}).rfind("day,trend_value,vol_value,corr_value,", 0) == 0);
  try {
    RegimeAssessor short_ref(p, 0, 10);
    FAIL("expected InsufficientHistory");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientHistory);
  }
}

TEST_CASE("category heuristic") {
  CHECK(classify(dsl::parse("ts_mean(volume,5)")) == lab::Category::Liquidity);
  CHECK(classify(dsl::parse("neg(ts_delta(close,5))")) == lab::Category::Reversal);
  CHECK(classify(dsl::parse("ts_delta(close,5)")) == lab::Category::Momentum);
  CHECK(classify(dsl::parse("cs_rank(ts_std(close,20))")) == lab::Category::Volatility);
  CHECK(classify(dsl::parse("ts_mean(low,5)")) == lab::Category::Volatility);
  CHECK(classify(dsl::parse("cs_rank(pe)")) == lab::Category::Value);
}

TEST_CASE("miner with zero budget changes nothing") {
  const auto p = synthetic::generate(base_spec(10, 120, 1));
  MinerConfig cfg;
  cfg.budget = 0;
  Miner miner(p, cfg, 9);
  lab::FactorLibrary lib;
  SignalCache sig(p);
  MemoryStore mem;
  const auto r = miner.cycle(lib, sig, mem, 119, 0);
  CHECK(lib.size() == 0);
  CHECK(mem.size() == 0);
  CHECK(r.validated == 0);
}

TEST_CASE("miner accepts exactly what exhaustive validation accepts") {
  auto spec = base_spec(60, 200, 21);
  spec.regimes = {{0, "ts_std(close,5)", 0.0015}};
  const auto p = synthetic::generate(spec);
  MinerConfig cfg;
  cfg.windows = {5};
  cfg.budget = 1000;
  cfg.max_new = 1000;
  Miner miner(p, cfg, 4);
  lab::FactorLibrary lib;
  SignalCache sig(p);
  MemoryStore mem;
  const auto r = miner.cycle(lib, sig, mem, 199, 0);
  CHECK(r.exhausted);
  CHECK(r.validated == static_cast<int>(miner.generator().size()));

  std::set<std::string> oracle;
  const DateRange window{p.calendar()[0], p.calendar()[199]};
  for (const auto& e : miner.generator().pool()) {
    try {
      const auto rep = lab::validate(e, p, window);
      if (lab::accept(rep)) oracle.insert(dsl::print(e));
    } catch (const Error&) {
    }
  }
  std::set<std::string> got;
  for (const auto& rec : lib.records()) got.insert(rec.expression);
  CHECK(got == oracle);
  CHECK(got.count("ts_std(close,5)") == 1);
  CHECK(mem.count("miner", Meta::Effective) == got.size());
  CHECK(mem.count("miner", Meta::Ineffective) == miner.generator().size() - got.size());

  // a second cycle right away finds everything recently tried
  const auto again = miner.cycle(lib, sig, mem, 199, 0);
  CHECK(again.validated == 0);
  CHECK(again.exhausted);
}

TEST_CASE("miner deprecates a factor whose IC flips sign") {
  auto spec = base_spec(30, 320, 8);
  spec.regimes = {{0, "ts_delta(close,5)", 0.004}, {160, "ts_delta(close,5)", -0.004}};
  const auto p = synthetic::generate(spec);
  MinerConfig cfg;
  cfg.windows = {5};
  cfg.ops = {"ts_delta"};
  cfg.fields = {"close"};
  cfg.transforms = {"id"};
  Miner miner(p, cfg, 1);
  lab::FactorLibrary lib;
  SignalCache sig(p);
  MemoryStore mem;
  const auto first = miner.cycle(lib, sig, mem, 150, miner.window_start(150));
  REQUIRE(first.accepted.size() == 1);
  const auto second = miner.cycle(lib, sig, mem, 310, miner.window_start(310));
  CHECK(second.deprecated == first.accepted);
  CHECK(lib.find(first.accepted[0])->status == lab::Status::Deprecated);
  CHECK(lib.find(first.accepted[0])->history.size() == 2);
  CHECK(count_kind(mem, "maintenance", Meta::Deprecated) == 1);
}

TEST_CASE("regime multiplier table") {
  const auto trending = make_assessment(Date::from_ymd(2021, 1, 4), 0.9, 0.5, 0.5);
  const auto ranging = make_assessment(Date::from_ymd(2021, 1, 4), 0.5, 1.0, 0.0);
  CHECK(regime_multiplier(lab::Category::Momentum, trending) == 1.25);
  CHECK(regime_multiplier(lab::Category::Momentum, ranging) == 0.75);
  CHECK(regime_multiplier(lab::Category::Reversal, ranging) == 1.25);
  CHECK(regime_multiplier(lab::Category::Reversal, trending) == 0.75);
  CHECK(regime_multiplier(lab::Category::Volatility, ranging) == 1.25);
  CHECK(regime_multiplier(lab::Category::Volatility, trending) == 1.0);
  CHECK(regime_multiplier(lab::Category::Liquidity, ranging) == 0.75);
  CHECK(regime_multiplier(lab::Category::Value, trending) == 1.0);
}

TEST_CASE("ensemble construction") {
  const auto sf = [](std::string id, double s, double ic) {
    ScoredFactor f;
    f.factor_id = std::move(id);
    f.suitability = s;
    f.ic.mean_ic = ic;
    return f;
  };
  const auto none = [](const std::string&, const std::string&) { return 0.0; };
  ScreenerConfig cfg;
  auto e = build_ensemble({sf("a", 0.4, 0.1), sf("b", 0.4, -0.1), sf("c", 0.2, 0.05)}, none, cfg);
  REQUIRE(e.size() == 3);
  CHECK(e[0].weight == 0.4);
  CHECK(e[1].weight == 0.4);
  CHECK(e[2].weight == 0.2);
  CHECK(e[1].direction == -1);

  const auto dup = [](const std::string& a, const std::string& b) {
    return (a == "a" && b == "b") || (a == "b" && b == "a") ? 1.0 : 0.1;
  };
  e = build_ensemble({sf("a", 0.5, 0.1), sf("b", 0.3, 0.1), sf("c", 0.2, 0.1)}, dup, cfg);
  REQUIRE(e.size() == 2);
  CHECK(e[0].factor_id == "a");
  CHECK(e[1].factor_id == "c");

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ScoredFactor> fs;
    for (int i = 0; i < 8; ++i) fs.push_back(sf("f" + std::to_string(i), u(rng), u(rng) - 1.0));
    auto scaled = fs;
    for (auto& f : scaled) f.suitability *= 3.5;
    rank_factors(fs);
    rank_factors(scaled);
    const auto corr = [&](const std::string& a, const std::string& b) {
      return std::abs(std::sin(static_cast<double>(a.back() * 7 + b.back())));
    };
    const auto x = build_ensemble(fs, corr, cfg);
    const auto y = build_ensemble(scaled, corr, cfg);
    REQUIRE(x.size() == y.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].factor_id == y[i].factor_id);
      CHECK((x[i].direction == 1 || x[i].direction == -1));
      total += x[i].weight;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("screener skip and correlated duplicates") {
  auto spec = base_spec(20, 200, 5);
  spec.regimes = {{0, "ts_mean(volume,5)", 0.004}};
  const auto p = synthetic::generate(spec);
  SignalCache sig(p);
  MemoryStore mem;
  const Screener scr(p, ScreenerConfig{});
  lab::FactorLibrary lib;
  for (const char* text : {"ts_mean(volume,5)", "cs_zscore(ts_mean(volume,5))"}) {
    lab::FactorRecord r;
    r.expression = text;
    r.factor_id = lab::factor_id_for(dsl::parse(text));
    r.status = lab::Status::Effective;
    lib.add(r);
  }
  auto res = scr.cycle(lib, sig, mem, 150, std::nullopt);
  CHECK(res.skipped);
  CHECK(res.ensemble.empty());
  CHECK(mem.count("screener", Meta::InsufficientFactors) == 1);

  lab::FactorRecord third;
  third.expression = "ts_delta(close,10)";
  third.factor_id = lab::factor_id_for(dsl::parse(third.expression));
  third.status = lab::Status::Effective;
  lib.add(third);
  res = scr.cycle(lib, sig, mem, 150, std::nullopt);
  CHECK_FALSE(res.skipped);
  // the z-scored copy is perfectly correlated with the raw signal
  std::set<std::string> picked;
  for (const auto& e : res.ensemble) picked.insert(lib.find(e.factor_id)->expression);
  CHECK((picked.count("ts_mean(volume,5)") + picked.count("cs_zscore(ts_mean(volume,5))")) == 1);
  double total = 0.0;
  for (const auto& e : res.ensemble) total += e.weight;
  CHECK(std::abs(total - 1.0) < 1e-9);
}

TEST_CASE("theta grid and fixed theta") {
  const auto us = exchange::MarketProfile::us();
  const auto csi = exchange::MarketProfile::csi();
  const auto g = theta_grid(TraderConfig{}, us);
  CHECK(g.size() == 9);
  CHECK(std::is_sorted(g.begin(), g.end(), theta_less));
  for (const auto& t : g) CHECK(t.gamma == 0.5);
  const auto gc = theta_grid(TraderConfig{}, csi);
  REQUIRE(gc.size() == 3);
  for (const auto& t : gc) {
    CHECK(t.n_short == 0);
    CHECK(t.gamma == 1.0);
  }
  CHECK(fixed_theta(us, 0.5) == strategy::Theta{10, 10, 0.8, 0.5});
  CHECK(fixed_theta(csi, 1.0) == strategy::Theta{10, 0, 0.8, 1.0});
}

TEST_CASE("objective prefers higher sharpe at equal drawdown") {
  const strategy::Theta a{5, 0, 0.8, 1.0};
  const auto slow = score_curve(a, {100, 101, 100.5, 101.5, 102}, 252, 0.0, 0.5);
  const auto fast = score_curve(a, {100, 102, 101.49, 103.5, 105}, 252, 0.0, 0.5);
  CHECK(std::abs(slow.mdd - (100.5 - 101) / 101) < 1e-15);
  CHECK(fast.mdd < 0.0);
  CHECK(*fast.sharpe > *slow.sharpe);
  const auto flat = score_curve(a, {100, 100, 100}, 252, 0.0, 0.5);
  CHECK_FALSE(flat.sharpe.has_value());
  CHECK(flat.objective == 0.0);
}

TEST_CASE("trader cycle") {
  auto spec = base_spec(20, 200, 6);
  spec.regimes = {{0, "ts_mean(volume,5)", 0.004}};
  const auto p = synthetic::generate(spec);
  const auto bars = strategy::build_day_bars(p);
  const auto profile = exchange::MarketProfile::us();
  SignalCache sig(p);
  const dsl::Expr e = dsl::parse("ts_mean(volume,5)");
  const Matrix& m = sig.get("f", e);
  const std::vector<strategy::EnsembleEntry> ens = {{"f", 1.0, 1, strategy::TransformHint::Zscore}};

  SUBCASE("empty ensemble skips") {
    const Trader tr(p, bars, profile, TraderConfig{}, 1e7);
    exchange::Exchange ex(profile, 1e7);
    ex.begin_day(p.calendar()[151]);
    MemoryStore mem;
    const auto r = tr.cycle(nullptr, std::nullopt, ex, mem, 150, true);
    CHECK(r.skipped);
    CHECK(ex.orders().empty());
    CHECK(mem.count("trader", Meta::EmptyEnsembleSkipped) == 1);
  }
  SUBCASE("single candidate grid") {
    TraderConfig cfg;
    cfg.n_long = {5};
    cfg.n_short = {5};
    const Trader tr(p, bars, profile, cfg, 1e7);
    exchange::Exchange ex(profile, 1e7);
    ex.begin_day(p.calendar()[151]);
    MemoryStore mem;
    ScoreBook book(p, ens, {{"f", &m}});
    const auto r = tr.cycle(&book, std::nullopt, ex, mem, 150, true);
    CHECK(r.theta == strategy::Theta{5, 5, 0.8, 0.5});
    CHECK(mem.count("trader", Meta::Improved) == 1);
    CHECK(mem.count("trader", Meta::Rejected) == 0);
    CHECK(r.decision.traded);
  }
  SUBCASE("choice matches independent lookback backtests") {
    TraderConfig cfg;
    cfg.n_long = {3, 8};
    cfg.n_short = {0};
    cfg.lookback = 60;
    const Trader tr(p, bars, profile, cfg, 1e7);
    exchange::Exchange ex(profile, 1e7);
    ex.begin_day(p.calendar()[151]);
    MemoryStore mem;
    ScoreBook book(p, ens, {{"f", &m}});
    const auto r = tr.cycle(&book, std::nullopt, ex, mem, 150, true);
    double best = -1e300;
    strategy::Theta want;
    for (const auto& th : tr.grid()) {
      strategy::BacktestOptions opts;
      const auto bt = strategy::run_backtest(p, bars, ens, {{"f", &m}}, th, profile, 91, 150, opts);
      std::vector<double> nav{1e7};
      nav.insert(nav.end(), bt.nav.begin(), bt.nav.end());
      const auto s = score_curve(th, nav, 252, profile.rf_annual, 0.5);
      if (s.objective > best) {
        best = s.objective;
        want = th;
      }
    }
    CHECK(r.theta == want);
    CHECK(mem.count("trader", Meta::Improved) + mem.count("trader", Meta::Rejected) == 2);
  }
  SUBCASE("high-vol scaling") {
    TraderConfig cfg;
    cfg.n_long = {5};
    cfg.n_short = {0};
    cfg.high_vol_exposure_scale = 0.5;
    const Trader tr(p, bars, profile, cfg, 1e7);
    exchange::Exchange ex(profile, 1e7);
    ex.begin_day(p.calendar()[151]);
    MemoryStore mem;
    ScoreBook book(p, ens, {{"f", &m}});
    const auto hot = make_assessment(p.calendar()[150], 0.5, 0.95, 0.5);
    const auto r = tr.cycle(&book, hot, ex, mem, 150, true);
    CHECK(r.executed.beta == doctest::Approx(0.4));
    CHECK(r.theta.beta == 0.8);
  }
}

TEST_CASE("run loop") {
  auto spec = base_spec(12, 260, 31);
  spec.regimes = {{0, "ts_mean(volume,5)", 0.004}};
  const auto p = synthetic::generate(spec);
  const auto cfg = small_config(p, 79, 89);

  SUBCASE("zero-day range stays flat") {
    auto c = cfg;
    c.backtest = {p.calendar().back() + 10, p.calendar().back() + 20};
    const auto r = run_loop(p, c);
    CHECK(r.curve == std::vector<double>{10'000'000.0});
    CHECK(r.trades.empty());
  }
  SUBCASE("deterministic") {
    const auto a = run_loop(p, cfg);
    const auto b = run_loop(p, cfg);
    CHECK(a.equity_csv() == b.equity_csv());
    CHECK(a.memory.dump() == b.memory.dump());
    CHECK(a.trades_csv() == b.trades_csv());
    CHECK(a.curve.size() == 260 - 90 + 1);
    CHECK(a.manifest["ablation"] == "NONE");
    CHECK(a.memory.count("trader", Meta::Executed) > 0);
    CHECK(a.memory.count("trader", Meta::Improved) > 0);
  }
  SUBCASE("no-trader has no search events") {
    auto c = cfg;
    c.ablation = Ablation::NoTrader;
    const auto r = run_loop(p, c);
    CHECK(r.memory.count("trader", Meta::Improved) == 0);
    CHECK(r.memory.count("trader", Meta::Rejected) == 0);
    for (const auto& d : r.days)
      if (d.theta) CHECK(*d.theta == strategy::Theta{10, 10, 0.8, 0.5});
  }
  SUBCASE("no-miner freezes the classical library") {
    auto c = cfg;
    c.ablation = Ablation::NoMiner;
    const auto r = run_loop(p, c);
    CHECK(r.library_snapshots.size() == 1);
    CHECK(r.memory.count("miner", Meta::Effective) == 0);
    CHECK(r.memory.count("miner", Meta::Ineffective) == 0);
    CHECK(r.library.size() == dsl::classical_reference().size());
    CHECK(r.manifest["library_frozen"] == true);
  }
  SUBCASE("no-screener samples uniformly with equal weights") {
    auto c = cfg;
    c.ablation = Ablation::NoScreener;
    const auto r = run_loop(p, c);
    std::size_t n = 0;
    for (const auto& d : r.days) {
      for (const auto& e : d.ensemble) CHECK(e.weight == doctest::Approx(1.0 / d.ensemble.size()));
      n += d.ensemble.empty() ? 0 : 1;
    }
    CHECK(n > 0);
  }
  SUBCASE("csi profile never shorts") {
    auto c = cfg;
    c.market = MarketId::CsiLike;
    const auto r = run_loop(p, c);
    for (const auto& t : r.trades) {
      CHECK(t.side != exchange::Side::Short);
      if (t.status == exchange::OrderStatus::Filled) CHECK(t.qty % 100 == 0);
    }
  }
}

TEST_CASE("ablation names and ranges") {
  CHECK(parse_ablation("no-trader") == Ablation::NoTrader);
  CHECK(parse_ablation("NO_SCREENER") == Ablation::NoScreener);
  CHECK(to_string(Ablation::NoMiner) == "NO_MINER");
  CHECK_THROWS_AS(parse_ablation("none-at-all"), Error);
  RunConfig c;
  c.train = {Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 6, 1)};
  c.valid = {Date::from_ymd(2020, 5, 1), Date::from_ymd(2020, 7, 1)};
  c.backtest = {Date::from_ymd(2020, 8, 1), Date::from_ymd(2020, 9, 1)};
  CHECK_THROWS_AS(validate_ranges(c), Error);
}

TEST_CASE("external policy falls back on bad output") {
  const auto p = synthetic::generate(base_spec(12, 200, 2));
  ExternalBackend echo("while read line; do echo 'not json'; done");
  CHECK_FALSE(echo.query("screener", {{"k", 1}}).has_value());
  ExternalBackend good("while read line; do echo '{\"theta\":{\"n_long\":4,\"n_short\":0,\"beta\":0.5,\"gamma\":1}}'; done");
  const auto reply = good.query("trader", nlohmann::json::object());
  REQUIRE(reply.has_value());
  CHECK((*reply)["theta"]["n_long"] == 4);
  ExternalBackend dead("exit 0");
  CHECK_FALSE(dead.query("miner", nlohmann::json::object()).has_value());
  CHECK_FALSE(dead.alive());
}
