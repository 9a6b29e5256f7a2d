#include "alphaloop/synthetic/generator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "json.hpp"

#include "alphaloop/core/error.hpp"
#include "alphaloop/dsl/evaluate.hpp"
#include "alphaloop/dsl/parser.hpp"

namespace alphaloop::synthetic {

using nlohmann::json;

namespace {

constexpr std::size_t kDriverLookback = 80;

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> keys,
                    const std::string& where) {
  for (const auto& [k, _] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw Error(ErrorCode::ConfigError, "unknown key '" + k + "' in " + where);
    }
  }
}

struct CompiledRegime {
  int start_day;
  dsl::Expr driver;
  double strength;
};

}  // namespace

SyntheticSpec parse_spec(std::string_view json_text) {
  SyntheticSpec s;
  try {
    const json j = json::parse(json_text);
    reject_unknown(j,
                   {"seed", "assets", "days", "start", "profile", "start_price", "base_volume",
                    "market", "idio_vol", "regimes", "fundamentals"},
                   "synthetic spec");
    read(j, "seed", s.seed);
    read(j, "assets", s.assets);
    read(j, "days", s.days);
    if (j.contains("start")) {
      const auto d = Date::parse(j.at("start").get<std::string>());
      if (!d) throw Error(ErrorCode::ConfigError, "synthetic spec: bad start date");
      s.start = *d;
    }
    if (j.contains("profile")) s.profile = parse_market(j.at("profile").get<std::string>());
    read(j, "start_price", s.start_price);
    read(j, "base_volume", s.base_volume);
    if (j.contains("market")) {
      const json& m = j.at("market");
      reject_unknown(m, {"drift", "vol_low", "vol_high", "block_days"}, "synthetic market");
      read(m, "drift", s.drift);
      read(m, "vol_low", s.vol_low);
      read(m, "vol_high", s.vol_high);
      read(m, "block_days", s.block_days);
    }
    read(j, "idio_vol", s.idio_vol);
    if (j.contains("regimes")) {
      for (const json& r : j.at("regimes")) {
        reject_unknown(r, {"start_day", "driver", "strength"}, "synthetic regime");
        Regime reg;
        read(r, "start_day", reg.start_day);
        read(r, "driver", reg.driver);
        read(r, "strength", reg.strength);
        s.regimes.push_back(reg);
      }
    }
    read(j, "fundamentals", s.fundamentals);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("synthetic spec: ") + e.what());
  }
  return s;
}

std::string spec_to_json(const SyntheticSpec& s) {
  json regimes = json::array();
  for (const auto& r : s.regimes) {
    regimes.push_back({{"start_day", r.start_day}, {"driver", r.driver}, {"strength", r.strength}});
  }
  const json j = {{"seed", s.seed},
                  {"assets", s.assets},
                  {"days", s.days},
                  {"start", s.start.to_string()},
                  {"profile", std::string(profile_name(s.profile))},
                  {"start_price", s.start_price},
                  {"base_volume", s.base_volume},
                  {"market",
                   {{"drift", s.drift},
                    {"vol_low", s.vol_low},
                    {"vol_high", s.vol_high},
                    {"block_days", s.block_days}}},
                  {"idio_vol", s.idio_vol},
                  {"regimes", regimes},
                  {"fundamentals", s.fundamentals}};
  return j.dump(2) + "\n";
}

PricePanel generate(const SyntheticSpec& spec) {
  if (spec.assets < 1 || spec.days < 2 || spec.block_days < 1 || !(spec.start_price > 0)) {
    throw Error(ErrorCode::ConfigError, "synthetic spec needs assets >= 1, days >= 2, block_days >= 1");
  }
  std::vector<CompiledRegime> regimes;
  for (const auto& r : spec.regimes) {
    try {
      regimes.push_back({r.start_day, dsl::parse(r.driver), r.strength});
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("synthetic driver: ") + e.what());
    }
  }
  std::sort(regimes.begin(), regimes.end(),
            [](const auto& a, const auto& b) { return a.start_day < b.start_day; });

  const auto n = static_cast<std::size_t>(spec.days);
  const auto m = static_cast<std::size_t>(spec.assets);
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);

  std::vector<std::string> ids;
  for (std::size_t i = 0; i < m; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "S%03zu", i);
    ids.emplace_back(buf);
  }
  std::vector<double> beta(m);
  for (auto& b : beta) b = 0.8 + 0.4 * uni(rng);

  // market factor path
  std::vector<double> mkt(n, 0.0);
  for (std::size_t t = 1; t < n; ++t) {
    const bool high = (t / static_cast<std::size_t>(spec.block_days)) % 2 == 1;
    mkt[t] = spec.drift + (high ? spec.vol_high : spec.vol_low) * z(rng);
  }

  PricePanel::Columns cols{Matrix(n, m), Matrix(n, m), Matrix(n, m), Matrix(n, m), Matrix(n, m),
                           {}};
  // volume: log-AR(1) around a common base
  for (std::size_t i = 0; i < m; ++i) {
    double x = 0.3 * z(rng);
    for (std::size_t t = 0; t < n; ++t) {
      x = 0.7 * x + 0.3 * z(rng);
      cols.volume(t, i) = std::round(spec.base_volume * std::exp(x));
    }
  }

  TradingCalendar cal(spec.profile, weekday_calendar(spec.start, n));
  auto set_bar = [&](std::size_t t, std::size_t i, double prev_close, double close) {
    const double open = std::max(prev_close * (1.0 + 0.002 * z(rng)), 1e-6);
    cols.open(t, i) = open;
    cols.close(t, i) = close;
    cols.high(t, i) = std::max(open, close) * (1.0 + std::abs(0.004 * z(rng)));
    cols.low(t, i) = std::min(open, close) * (1.0 - std::min(0.5, std::abs(0.004 * z(rng))));
  };
  for (std::size_t i = 0; i < m; ++i) {
    set_bar(0, i, spec.start_price, spec.start_price * (1.0 + 0.01 * z(rng)));
  }

  for (std::size_t t = 1; t < n; ++t) {
    std::vector<double> tilt(m, 0.0);
    const CompiledRegime* active = nullptr;
    for (const auto& r : regimes) {
      if (static_cast<std::size_t>(std::max(r.start_day, 0)) <= t) active = &r;
    }
    if (active && active->strength != 0.0) {
      const std::size_t first = t > kDriverLookback ? t - kDriverLookback : 0;
      std::vector<Date> days(cal.days().begin() + static_cast<std::ptrdiff_t>(first),
                             cal.days().begin() + static_cast<std::ptrdiff_t>(t));
      PricePanel::Columns past{cols.open.rows_between(first, t - 1),
                               cols.high.rows_between(first, t - 1),
                               cols.low.rows_between(first, t - 1),
                               cols.close.rows_between(first, t - 1),
                               cols.volume.rows_between(first, t - 1),
                               {}};
      const PricePanel window(TradingCalendar(spec.profile, std::move(days)), ids, std::move(past));
      Matrix sig;
      try {
        sig = dsl::evaluate(dsl::Expr::call(dsl::Op::CsZscore, {active->driver}), window);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::EmptyCrossSection) throw;
      }
      if (!sig.empty()) {
        const std::size_t last = sig.rows() - 1;
        for (std::size_t i = 0; i < m; ++i) {
          const double v = sig(last, i);
          if (!is_missing(v)) tilt[i] = active->strength * v;
        }
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double r = beta[i] * mkt[t] + tilt[i] + spec.idio_vol * z(rng);
      const double prev = cols.close(t - 1, i);
      set_bar(t, i, prev, prev * std::max(1.0 + r, 0.5));
    }
  }

  if (spec.fundamentals) {
    Matrix pe(n, m), ps(n, m), pb(n, m), dyr(n, m);
    for (std::size_t i = 0; i < m; ++i) {
      const double eps = spec.start_price / (8.0 + 20.0 * uni(rng));
      const double sales = spec.start_price / (0.5 + 4.0 * uni(rng));
      const double book = spec.start_price / (0.8 + 3.0 * uni(rng));
      const double div = spec.start_price * 0.03 * uni(rng);
      for (std::size_t t = 0; t < n; ++t) {
        const double px = cols.close(t, i);
        pe(t, i) = px / eps;
        ps(t, i) = px / sales;
        pb(t, i) = px / book;
        dyr(t, i) = div / px;
      }
    }
    cols.fundamentals.emplace(Field::Pe, std::move(pe));
    cols.fundamentals.emplace(Field::Ps, std::move(ps));
    cols.fundamentals.emplace(Field::Pb, std::move(pb));
    cols.fundamentals.emplace(Field::Dyr, std::move(dyr));
  }

  IndexBars index;
  double level = 100.0;
  for (std::size_t t = 0; t < n; ++t) {
    const double prev = level;
    level *= 1.0 + mkt[t];
    const double open = prev * (1.0 + 0.001 * z(rng));
    const double width = t / static_cast<std::size_t>(spec.block_days) % 2 == 1 ? spec.vol_high
                                                                                  : spec.vol_low;
    index.open.push_back(open);
    index.close.push_back(level);
    index.high.push_back(std::max(open, level) * (1.0 + std::abs(0.5 * width * z(rng))));
    index.low.push_back(std::min(open, level) * (1.0 - std::min(0.5, std::abs(0.5 * width * z(rng)))));
  }

  return PricePanel(std::move(cal), std::move(ids), std::move(cols), std::nullopt,
                    std::move(index));
}

}  // namespace alphaloop::synthetic
