#include "alphaloop/agents/run.hpp"

#include <algorithm>
#include <random>
#include <spdlog/spdlog.h>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/core/stats.hpp"
#include "alphaloop/dsl/parser.hpp"
#include "alphaloop/lab/validation.hpp"

namespace alphaloop::agents {

namespace {

struct Rows {
  std::size_t first = 0;
  std::size_t last = 0;
  bool empty = true;
};

Rows rows_of(const TradingCalendar& cal, DateRange r) {
  Rows out;
  if (cal.empty()) return out;
  out.first = cal.lower_bound(r.start);
  const auto last = cal.last_at_or_before(r.end);
  if (out.first >= cal.size() || !last || *last < out.first) return out;
  out.last = *last;
  out.empty = false;
  return out;
}

nlohmann::ordered_json range_json(DateRange r) {
  return {{"start", r.start.to_string()}, {"end", r.end.to_string()}};
}

template <typename T>
nlohmann::ordered_json list_json(const std::vector<T>& v) {
  auto a = nlohmann::ordered_json::array();
  for (const auto& x : v) a.push_back(x);
  return a;
}

}  // namespace

std::string_view to_string(Ablation a) {
  switch (a) {
    case Ablation::None: return "NONE";
    case Ablation::NoMiner: return "NO_MINER";
    case Ablation::NoScreener: return "NO_SCREENER";
    case Ablation::NoTrader: return "NO_TRADER";
  }
  return "NONE";
}

Ablation parse_ablation(std::string_view s) {
  if (s == "NONE" || s == "none") return Ablation::None;
  if (s == "NO_MINER" || s == "no-miner") return Ablation::NoMiner;
  if (s == "NO_SCREENER" || s == "no-screener") return Ablation::NoScreener;
  if (s == "NO_TRADER" || s == "no-trader") return Ablation::NoTrader;
  throw Error(ErrorCode::ConfigError, "unknown ablation mode '" + std::string(s) + "'");
}

void validate_ranges(const RunConfig& cfg) {
  for (const auto* r : {&cfg.train, &cfg.valid, &cfg.backtest}) {
    if (r->end < r->start) {
      throw Error(ErrorCode::ConfigError, "date range " + r->start.to_string() + ".." +
                                              r->end.to_string() + " ends before it starts");
    }
  }
  if (!(cfg.train.end < cfg.valid.start) || !(cfg.valid.end < cfg.backtest.start)) {
    throw Error(ErrorCode::ConfigError, "date ranges must be ordered train < valid < backtest");
  }
}

nlohmann::ordered_json to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["profile"] = std::string(profile_name(cfg.market));
  j["seed"] = cfg.seed;
  j["train"] = range_json(cfg.train);
  j["valid"] = range_json(cfg.valid);
  j["backtest"] = range_json(cfg.backtest);
  j["initial_capital"] = cfg.initial_capital;
  j["ablation"] = std::string(to_string(cfg.ablation));
  j["policy"] = std::string(to_string(cfg.policy));
  if (!cfg.policy_command.empty()) j["policy_command"] = cfg.policy_command;

  const auto& m = cfg.miner;
  j["miner"] = {{"budget", m.budget},
                {"max_new", m.max_new},
                {"cadence", m.cadence},
                {"window", m.window},
                {"revisit", m.revisit},
                {"transforms", list_json(m.transforms)},
                {"ops", list_json(m.ops)},
                {"fields", list_json(m.fields)},
                {"windows", list_json(m.windows)},
                {"rank_ic", m.validation.rank_ic},
                {"max_horizon", m.validation.max_horizon}};
  j["acceptance"] = {{"ic_min", m.acceptance.ic_min},
                     {"icir_min", m.acceptance.icir_min},
                     {"coverage_min", m.acceptance.coverage_min},
                     {"turnover_max", m.acceptance.turnover_max}};
  const auto& s = cfg.screener;
  j["screener"] = {{"min_factors", s.min_factors},
                   {"k", s.k},
                   {"corr_threshold", s.corr_threshold},
                   {"icir_window", s.icir_window},
                   {"corr_window", s.corr_window},
                   {"hint", std::string(strategy::to_string(s.hint))}};
  const auto& t = cfg.trader;
  j["trader"] = {{"n_long", list_json(t.n_long)},
                 {"n_short", list_json(t.n_short)},
                 {"beta", t.beta},
                 {"gamma", t.gamma ? nlohmann::ordered_json(*t.gamma) : nlohmann::ordered_json(nullptr)},
                 {"lookback", t.lookback},
                 {"lambda", t.lambda},
                 {"high_vol_exposure_scale", t.high_vol_exposure_scale},
                 {"high_vol_level", t.high_vol_level}};
  const auto& r = cfg.regime;
  j["regime"] = {{"trend_window", r.trend_window},
                 {"vol_window", r.vol_window},
                 {"corr_window", r.corr_window},
                 {"sigma_ann", r.sigma_ann},
                 {"full_sample_quantiles", r.full_sample_quantiles}};
  return j;
}

std::string EpisodeResult::equity_csv() const {
  std::string out = "day,nav,net_position_rate\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double npr = i == 0 ? 0.0 : days[i - 1].net_position_rate;
    out += curve_days[i].to_string() + ',' + io::format_double(curve[i]) + ',' +
           io::format_double(npr) + '\n';
  }
  return out;
}

std::string EpisodeResult::trades_csv() const { return exchange::trade_log_csv(trades); }

std::string EpisodeResult::snapshots_jsonl() const {
  std::string out;
  for (const auto& s : snapshots) out += s + '\n';
  return out;
}

std::string EpisodeResult::library_snapshots_jsonl() const {
  std::string out;
  for (const auto& s : library_snapshots) out += to_json_line(s) + '\n';
  return out;
}

lab::FactorLibrary classical_library(const std::vector<dsl::ReferenceFactor>& refs) {
  lab::FactorLibrary lib;
  for (const auto& r : refs) {
    lab::FactorRecord rec;
    rec.factor_id = lab::factor_id_for(r.expr);
    if (lib.find(rec.factor_id)) continue;
    rec.expression = dsl::print(r.expr);
    rec.category = lab::parse_category(r.category).value_or(lab::Category::Other);
    rec.status = lab::Status::Effective;
    lib.add(std::move(rec));
  }
  return lib;
}

EpisodeResult run_loop(const PricePanel& panel, const RunConfig& cfg, lab::FactorLibrary initial,
                       PolicyBackend* policy) {
  validate_ranges(cfg);
  const auto& cal = panel.calendar();
  const exchange::MarketProfile profile = exchange::MarketProfile::for_market(cfg.market);
  EpisodeResult out;
  out.manifest["config"] = to_json(cfg);
  out.manifest["seed"] = cfg.seed;
  out.manifest["profile"] = std::string(profile_name(cfg.market));
  out.manifest["ablation"] = std::string(to_string(cfg.ablation));
  out.manifest["date_range"] = range_json(cfg.backtest);
  out.manifest["initial_capital"] = cfg.initial_capital;
  out.manifest["library_frozen"] = cfg.ablation == Ablation::NoMiner;
  out.manifest["policy"] = std::string(to_string(cfg.policy));

  std::mt19937_64 rng(cfg.seed);
  const std::uint64_t miner_seed = rng();

  out.library = cfg.ablation == Ablation::NoMiner ? classical_library(dsl::classical_reference())
                                                  : std::move(initial);
  const Rows train = rows_of(cal, cfg.train);
  Rows bt = rows_of(cal, cfg.backtest);
  if (!bt.empty && bt.first == 0) {
    bt.first = 1;
    bt.empty = bt.last < 1;
  }
  if (bt.empty) {
    out.curve_days = {cfg.backtest.start};
    out.curve = {cfg.initial_capital};
    return out;
  }

  const auto bars = strategy::build_day_bars(panel);
  SignalCache signals(panel);
  Miner miner(panel, cfg.miner, miner_seed);
  const Screener screener(panel, cfg.screener);
  const Trader trader(panel, bars, profile, cfg.trader, cfg.initial_capital);
  std::optional<RegimeAssessor> assessor;
  try {
    const std::size_t ref_first = train.empty ? 0 : train.first;
    const std::size_t ref_last = train.empty ? bt.first - 1 : train.last;
    assessor.emplace(panel, ref_first, ref_last, cfg.regime);
  } catch (const Error& e) {
    spdlog::warn("regime assessment disabled: {}", e.what());
  }

  std::map<std::string, int> train_direction;
  const auto direction_from_train = [&](const lab::FactorRecord& r) {
    const auto it = train_direction.find(r.factor_id);
    if (it != train_direction.end()) return it->second;
    int d = 1;
    if (!train.empty && train.last > train.first) {
      try {
        const auto ics = lab::ic_series(signals.get(r.factor_id, dsl::parse(r.expression)),
                                        screener.forward_returns(), train.first, train.last - 1);
        double sum = 0.0;
        for (const auto& p : ics) sum += p.ic;
        d = sum >= 0.0 ? 1 : -1;
      } catch (const Error&) {
      }
    }
    train_direction.emplace(r.factor_id, d);
    return d;
  };

  if (cfg.ablation == Ablation::NoMiner) {
    out.library_snapshots.push_back(snapshot_of(out.library, cal[bt.first - 1]));
  }

  exchange::Exchange ex(profile, cfg.initial_capital);
  out.curve_days.push_back(cal[bt.first - 1]);
  out.curve.push_back(cfg.initial_capital);
  double prev_nav = cfg.initial_capital;

  for (std::size_t t = bt.first; t <= bt.last; ++t) {
    const std::size_t d = t - 1;
    const Date day = cal[t];
    ex.begin_day(day);

    if (cfg.ablation != Ablation::NoMiner && cfg.miner.cadence > 0 &&
        (t - bt.first) % static_cast<std::size_t>(cfg.miner.cadence) == 0) {
      const std::size_t wf = (t == bt.first && !train.empty && train.first <= d) ? train.first
                                                                                  : miner.window_start(d);
      miner.cycle(out.library, signals, out.memory, d, wf, policy);
      out.library_snapshots.push_back(snapshot_of(out.library, cal[d]));
    }

    std::optional<RegimeAssessment> regime;
    if (assessor) {
      try {
        regime = assessor->assess(d);
        out.assessments.push_back(*regime);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientHistory) throw;
      }
    }

    std::vector<strategy::EnsembleEntry> ensemble;
    if (cfg.ablation == Ablation::NoScreener) {
      std::vector<const lab::FactorRecord*> pool;
      for (const auto* r : out.library.with_status(lab::Status::Effective)) {
        try {
          signals.get(r->factor_id, dsl::parse(r->expression));
          pool.push_back(r);
        } catch (const Error&) {
        }
      }
      const std::size_t k = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(cfg.screener.k, 0)));
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
      }
      for (std::size_t i = 0; i < k; ++i) {
        ensemble.push_back({pool[i]->factor_id, 1.0 / static_cast<double>(k),
                            direction_from_train(*pool[i]), cfg.screener.hint});
      }
      Event ev{cal[d], "screener", "ensemble", std::nullopt, {}};
      ev.payload["mode"] = "uniform";
      ev.payload["entries"] = ensemble_json(ensemble);
      out.memory.append(std::move(ev));
    } else {
      ensemble = screener.cycle(out.library, signals, out.memory, d, regime, policy).ensemble;
    }

    std::optional<ScoreBook> book;
    if (!ensemble.empty()) {
      std::map<std::string, const Matrix*> sig;
      for (const auto& e : ensemble) sig[e.factor_id] = signals.find(e.factor_id);
      book.emplace(panel, ensemble, std::move(sig));
    }
    const bool search = cfg.ablation != Ablation::NoTrader;
    const TraderResult tr =
        trader.cycle(book ? &*book : nullptr, regime, ex, out.memory, d, search, policy);

    ex.settle_day(bars[t].closes);
    DayRecord rec;
    rec.day = day;
    rec.nav = ex.nav(bars[t].marks);
    rec.net_position_rate = rec.nav > 0.0 ? ex.net_position_rate(bars[t].marks) : kMissing;
    rec.traded = tr.decision.traded;
    if (!tr.skipped) rec.theta = tr.executed;
    rec.ensemble = ensemble;
    if (!tr.skipped) {
      nlohmann::ordered_json payload;
      payload["r_t"] = rec.nav / prev_nav - 1.0;
      payload["nav"] = rec.nav;
      payload["theta"] = to_json(tr.executed);
      out.memory.append({day, "trader", "executed", Meta::Executed, payload});
    }
    prev_nav = rec.nav;
    out.snapshots.push_back(ex.snapshot_json(bars[t].marks));
    out.curve_days.push_back(day);
    out.curve.push_back(rec.nav);
    out.days.push_back(std::move(rec));
  }
  out.trades = ex.trade_log();
  return out;
}

}  // namespace alphaloop::agents
