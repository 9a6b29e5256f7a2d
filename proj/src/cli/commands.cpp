#include "alphaloop/cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <map>
#include <ostream>
#include <random>
#include <spdlog/spdlog.h>

#include "alphaloop/analysis/analysis.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/dsl/evaluate.hpp"
#include "alphaloop/dsl/parser.hpp"
#include "alphaloop/lab/library.hpp"
#include "alphaloop/metrics/metrics.hpp"
#include "alphaloop/panel/loader.hpp"
#include "alphaloop/strategy/backtest.hpp"
#include "alphaloop/synthetic/generator.hpp"

namespace alphaloop::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

struct Rows {
  std::size_t first = 0;
  std::size_t last = 0;
};

Rows rows_in(const TradingCalendar& cal, DateRange r, const char* what) {
  const std::size_t first = cal.lower_bound(r.start);
  const auto last = cal.last_at_or_before(r.end);
  if (first >= cal.size() || !last || *last < first) {
    throw Error(ErrorCode::DateOutOfRange, std::string(what) + " range " + r.start.to_string() +
                                               ".." + r.end.to_string() + " has no trading days");
  }
  return {first, *last};
}

std::string checksum(const PricePanel& p) { return io::hex64(io::fnv1a64(serialize_panel(p))); }

fs::path factors_dir(const Session& s) { return s.workspace / "factors"; }

std::string default_id(const Session& s, std::string_view command) {
  const std::string key = s.config_text + "|" + std::to_string(s.cfg.run.seed) + "|" +
                          std::string(profile_name(s.cfg.run.market)) + "|" +
                          std::string(agents::to_string(s.cfg.run.ablation)) + "|" +
                          std::string(command);
  return std::string(command) + "-" + io::hex64(io::fnv1a64(key)).substr(0, 10);
}

fs::path artifact_dir(const Session& s, std::string_view command) {
  fs::path dir = !s.opts.out.empty() ? s.opts.out
                                     : s.workspace / "runs" /
                                           (s.opts.id.empty() ? default_id(s, command) : s.opts.id);
  dir = dir.lexically_normal();
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, std::string_view text) { io::write_file_atomic(p, text); }

ordered_json base_manifest(const Session& s, const LoadedPanel& data, std::string_view command) {
  ordered_json m;
  m["command"] = std::string(command);
  m["config_dir"] = fs::absolute(s.config_dir).lexically_normal().string();
  ordered_json ov = ordered_json::object();
  if (s.opts.seed) ov["seed"] = *s.opts.seed;
  if (s.opts.profile) ov["profile"] = *s.opts.profile;
  m["overrides"] = ov;
  m["data"] = data.source;
  m["config"] = agents::to_json(s.cfg.run);
  return m;
}

lab::FactorLibrary workspace_library(const Session& s) {
  return lab::FactorLibrary(lab::load_library(factors_dir(s)));
}

void save_library(const lab::FactorLibrary& lib, const fs::path& dir) {
  for (const auto& r : lib.records()) lab::save_factor(r, dir);
}

std::unique_ptr<agents::PolicyBackend> backend_for(const agents::RunConfig& r) {
  return agents::make_backend(r.policy, r.policy_command);
}

exchange::Side parse_side(const std::string& s) {
  for (auto v : {exchange::Side::Buy, exchange::Side::Sell, exchange::Side::Short,
                 exchange::Side::Cover}) {
    if (exchange::to_string(v) == s) return v;
  }
  throw Error(ErrorCode::CorruptRecord, "trades.csv: unknown side '" + s + "'");
}

exchange::OrderStatus parse_status(const std::string& s) {
  for (auto v : {exchange::OrderStatus::Pending, exchange::OrderStatus::Filled,
                 exchange::OrderStatus::Expired, exchange::OrderStatus::Rejected,
                 exchange::OrderStatus::Cancelled}) {
    if (exchange::to_string(v) == s) return v;
  }
  throw Error(ErrorCode::CorruptRecord, "trades.csv: unknown status '" + s + "'");
}

Date parse_day(std::string_view text, const char* file) {
  const auto d = Date::parse(io::trim(text));
  if (!d) throw Error(ErrorCode::CorruptRecord, std::string(file) + ": bad date '" + std::string(text) + "'");
  return *d;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::size_t s = 0;
  while (s < text.size()) {
    std::size_t e = text.find('\n', s);
    if (e == std::string::npos) e = text.size();
    if (e > s) out.push_back(text.substr(s, e - s));
    s = e + 1;
  }
  return out;
}

struct EquityFile {
  std::vector<Date> days;
  std::vector<double> nav;
  std::vector<double> net_position;
};

EquityFile read_equity(const fs::path& p) {
  EquityFile f;
  const auto lines = lines_of(io::read_file(p));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto cols = io::split(lines[i], ',');
    if (cols.size() != 3) throw Error(ErrorCode::CorruptRecord, "equity.csv: expected 3 columns");
    f.days.push_back(parse_day(cols[0], "equity.csv"));
    const auto nav = io::parse_double(cols[1]);
    const auto npr = io::parse_double(cols[2]);
    if (!nav) throw Error(ErrorCode::CorruptRecord, "equity.csv: bad nav");
    f.nav.push_back(*nav);
    f.net_position.push_back(npr ? *npr : kMissing);
  }
  return f;
}

// Everything a post-hoc analysis needs from one run directory.
struct RunArtifacts {
  Session session;
  ordered_json manifest;
  fs::path dir;
};

RunArtifacts open_run(const fs::path& dir) {
  RunArtifacts a;
  a.dir = dir;
  try {
    a.manifest = ordered_json::parse(io::read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord, "manifest.json: " + std::string(e.what()));
  }
  Options o;
  o.config = dir / "config.ini";
  const auto& ov = a.manifest.at("overrides");
  if (ov.contains("seed")) o.seed = ov.at("seed").get<std::uint64_t>();
  if (ov.contains("profile")) o.profile = ov.at("profile").get<std::string>();
  a.session.config_text = io::read_file(o.config);
  a.session.config_dir = a.manifest.at("config_dir").get<std::string>();
  a.session.cfg = parse_config(a.session.config_text, a.session.config_dir);
  if (o.seed) a.session.cfg.run.seed = *o.seed;
  if (o.profile) a.session.cfg.run.market = parse_market(*o.profile);
  if (a.manifest.contains("ablation")) {
    a.session.cfg.run.ablation = agents::parse_ablation(a.manifest.at("ablation").get<std::string>());
  }
  a.session.opts = o;
  return a;
}

void check_data(const RunArtifacts& a, const LoadedPanel& data) {
  const auto want = a.manifest.at("data").at("checksum").get<std::string>();
  if (data.source.at("checksum").get<std::string>() != want) {
    throw Error(ErrorCode::IoError, "input data changed since the run (checksum " + want + ")");
  }
}

std::vector<agents::RegimeAssessment> read_regime(const fs::path& p) {
  std::vector<agents::RegimeAssessment> out;
  const auto lines = lines_of(io::read_file(p));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto c = io::split(lines[i], ',');
    if (c.size() < 4) throw Error(ErrorCode::CorruptRecord, "regime.csv: expected 7 columns");
    const auto tv = io::parse_double(c[1]), vv = io::parse_double(c[2]), cv = io::parse_double(c[3]);
    if (!tv || !vv || !cv) throw Error(ErrorCode::CorruptRecord, "regime.csv: bad value");
    out.push_back(agents::make_assessment(parse_day(c[0], "regime.csv"), *tv, *vv, *cv));
  }
  return out;
}

std::vector<agents::LibrarySnapshot> read_snapshots(const fs::path& p) {
  std::vector<agents::LibrarySnapshot> out;
  for (const auto& line : lines_of(io::read_file(p))) out.push_back(agents::snapshot_from_json(line));
  return out;
}

void analyze_decay(const RunArtifacts& a, const LoadedPanel& data, std::ostream& os) {
  const auto& cfg = a.session.cfg;
  const auto& panel = data.panel;
  const Rows bt = rows_in(panel.calendar(), cfg.run.backtest, "backtest");
  std::mt19937_64 rng(cfg.run.seed);
  const agents::CandidateGenerator gen(panel, cfg.run.miner, rng());
  const auto snaps = read_snapshots(a.dir / "library_snapshots.jsonl");
  std::vector<dsl::Expr> cands = gen.pool();
  analysis::DecayTable table(panel, cands,
                             analysis::block_periods(bt.first, bt.last, cfg.analysis.decay_block));
  std::vector<analysis::DecayRow> rows;
  for (auto mode : {analysis::DecayMode::GlobalTopK, analysis::DecayMode::PeriodicTopK,
                    analysis::DecayMode::AdaptiveLibrary}) {
    try {
      const auto r = analysis::alpha_decay(table, mode, cfg.analysis.decay_k, snaps);
      rows.insert(rows.end(), r.begin(), r.end());
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyCandidateSet) throw;
      spdlog::warn("decay {}: {}", analysis::to_string(mode), e.what());
    }
  }
  write(a.dir / "decay_report.csv", analysis::decay_csv(rows));
  os << "decay_report.csv: " << rows.size() << " rows\n";
}

void analyze_coherence(const RunArtifacts& a, std::ostream& os) {
  const auto all = read_regime(a.dir / "regime.csv");
  // one assessment per miner cadence keeps the matrices readable
  const std::size_t stride = static_cast<std::size_t>(std::max(1, a.session.cfg.run.miner.cadence / 6));
  std::vector<agents::RegimeAssessment> as;
  std::vector<analysis::MarketProxy> px;
  for (std::size_t i = 0; i < all.size(); i += stride) {
    as.push_back(all[i]);
    px.push_back({all[i].trend_value, all[i].vol_value, all[i].corr_value});
  }
  const auto ms = analysis::coherence_matrices(as, px);
  for (const auto& m : ms) {
    const std::string name = m.dimension == agents::Dimension::Trend ? "trend"
                             : m.dimension == agents::Dimension::Vol ? "vol"
                                                                     : "corr";
    write(a.dir / ("coherence_" + name + ".csv"), analysis::coherence_csv(m));
    write(a.dir / ("coherence_" + name + ".svg"), analysis::coherence_svg(m));
    os << "coherence_" << name << ": " << m.raw.rows() << "x" << m.raw.cols()
       << (m.degenerate ? " (constant)" : "") << "\n";
  }
}

void analyze_exposure(const RunArtifacts& a, const LoadedPanel& data, std::ostream& os) {
  const auto eq = read_equity(a.dir / "equity.csv");
  const auto& cal = data.panel.calendar();
  const auto& idx = data.panel.index();
  IndexBars bars;
  std::vector<double> npr;
  std::vector<Date> days;
  for (std::size_t i = 1; i < eq.days.size(); ++i) {
    const auto row = cal.index_of(eq.days[i]);
    if (!row) throw Error(ErrorCode::CorruptRecord, "equity.csv day not in the panel calendar");
    bars.open.push_back(idx.open[*row]);
    bars.high.push_back(idx.high[*row]);
    bars.low.push_back(idx.low[*row]);
    bars.close.push_back(idx.close[*row]);
    npr.push_back(eq.net_position[i]);
    days.push_back(eq.days[i]);
  }
  const auto fit = analysis::exposure_volatility(bars, npr);
  write(a.dir / "exposure.csv", analysis::exposure_csv(fit, days));
  write(a.dir / "exposure_fit.json", analysis::exposure_fit_json(fit));
  os << "exposure_fit.json: " << analysis::exposure_fit_json(fit);
}

void analyze_diversity(const RunArtifacts& a, std::ostream& os) {
  std::vector<std::vector<dsl::Expr>> sets;
  for (const auto& s : read_snapshots(a.dir / "library_snapshots.jsonl")) {
    std::vector<dsl::Expr> set;
    for (const auto& [id, text] : s.effective) set.push_back(dsl::parse(text));
    sets.push_back(std::move(set));
  }
  std::vector<dsl::Expr> ref;
  for (const auto& r : dsl::classical_reference()) ref.push_back(r.expr);
  const auto rep = analysis::diversity_report(sets, ref);
  write(a.dir / "diversity.json", analysis::diversity_json(rep));
  os << "diversity.json: " << rep.trials.size() << " snapshots\n";
}

void analyze_friction(const RunArtifacts& a, std::ostream& os) {
  const auto eq = read_equity(a.dir / "equity.csv");
  const auto trades = parse_trades_csv(io::read_file(a.dir / "trades.csv"));
  const auto rep = analysis::friction_report(trades, eq.days, eq.nav);
  write(a.dir / "friction.csv", analysis::friction_csv(rep));
  os << "friction.csv: max turnover " << io::format_double(rep.max_turnover) << ", "
     << rep.exceeding.size() << " days above 1.0\n";
}

std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", v * 100.0 == 0.0 ? 0.0 : v * 100.0);
  return buf;
}

}  // namespace

Session open_session(const Options& opts) {
  if (opts.config.empty()) throw Error(ErrorCode::ConfigError, "--config is required");
  Session s;
  s.opts = opts;
  try {
    s.config_text = io::read_file(opts.config);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("cannot read config: ") + e.what());
  }
  s.config_dir = opts.config.has_parent_path() ? opts.config.parent_path() : fs::path(".");
  s.cfg = parse_config(s.config_text, s.config_dir);
  if (opts.seed) s.cfg.run.seed = *opts.seed;
  if (opts.profile) {
    try {
      s.cfg.run.market = parse_market(*opts.profile);
    } catch (const Error& e) {
      throw Error(ErrorCode::ConfigError, std::string("--profile: ") + e.what());
    }
  }
  s.workspace = s.cfg.workspace;
  if (const char* env = std::getenv("ALPHALOOP_WORKSPACE"); env && *env) s.workspace = env;
  return s;
}

LoadedPanel load_data(const CliConfig& cfg) {
  LoadedPanel out;
  if (!cfg.data.dir.empty()) {
    out.panel = load_panel(cfg.data.dir, cfg.run.market);
    out.source["kind"] = "dir";
    out.source["path"] = fs::absolute(cfg.data.dir).lexically_normal().string();
  } else if (!cfg.data.synthetic.empty()) {
    auto spec = synthetic::parse_spec(io::read_file(cfg.data.synthetic));
    spec.profile = cfg.run.market;
    out.panel = synthetic::generate(spec);
    out.source["kind"] = "synthetic";
    out.source["path"] = fs::absolute(cfg.data.synthetic).lexically_normal().string();
  } else {
    throw Error(ErrorCode::ConfigError, "[data] needs dir or synthetic");
  }
  out.source["days"] = out.panel.num_days();
  out.source["assets"] = out.panel.num_assets();
  out.source["checksum"] = checksum(out.panel);
  return out;
}

void cmd_example_config(const fs::path& out, std::ostream& os) {
  if (out.empty()) {
    os << example_config();
    return;
  }
  write(out, example_config());
  os << out.string() << "\n";
}

void cmd_ingest(const Options& opts, const fs::path& synthetic, std::ostream& os) {
  PricePanel panel;
  ordered_json summary;
  fs::path workspace = ".";
  if (!synthetic.empty()) {
    auto spec = synthetic::parse_spec(io::read_file(synthetic));
    if (opts.profile) spec.profile = parse_market(*opts.profile);
    if (opts.seed) spec.seed = *opts.seed;
    panel = synthetic::generate(spec);
    summary["source"] = "synthetic";
    summary["spec"] = nlohmann::ordered_json::parse(synthetic::spec_to_json(spec));
  } else {
    const Session s = open_session(opts);
    workspace = s.workspace;
    panel = load_data(s.cfg).panel;
    summary["source"] = "dir";
  }
  if (const char* env = std::getenv("ALPHALOOP_WORKSPACE"); env && *env) workspace = env;
  const fs::path dest = !opts.out.empty() ? opts.out : workspace / "panel";
  write_panel(panel, dest);
  summary["out"] = dest.string();
  summary["days"] = panel.num_days();
  summary["assets"] = panel.num_assets();
  summary["first_day"] = panel.calendar().front().to_string();
  summary["last_day"] = panel.calendar().back().to_string();
  summary["checksum"] = checksum(panel);
  write(dest / "panel.json", summary.dump(2) + "\n");
  os << summary.dump(2) << "\n";
}

void cmd_mine(const Options& opts, std::ostream& os) {
  const Session s = open_session(opts);
  const auto data = load_data(s.cfg);
  const auto& panel = data.panel;
  const Rows train = rows_in(panel.calendar(), s.cfg.run.train, "train");
  auto lib = workspace_library(s);
  std::mt19937_64 rng(s.cfg.run.seed);
  agents::Miner miner(panel, s.cfg.run.miner, rng());
  agents::SignalCache signals(panel);
  agents::MemoryStore memory;
  const auto policy = backend_for(s.cfg.run);
  const auto r = miner.cycle(lib, signals, memory, train.last, train.first, policy.get());
  save_library(lib, factors_dir(s));

  const fs::path dir = artifact_dir(s, "mine");
  write(dir / "config.ini", s.config_text);
  write(dir / "memory.jsonl", memory.dump());
  ordered_json m = base_manifest(s, data, "mine");
  m["seed"] = s.cfg.run.seed;
  write(dir / "manifest.json", m.dump(2) + "\n");

  ordered_json out;
  out["validated"] = r.validated;
  out["accepted"] = r.accepted;
  out["maintained"] = r.maintained;
  out["deprecated"] = r.deprecated;
  out["exhausted"] = r.exhausted;
  out["library"] = factors_dir(s).string();
  out["effective"] = lib.with_status(lab::Status::Effective).size();
  os << out.dump(2) << "\n";
}

void cmd_screen(const Options& opts, std::ostream& os) {
  const Session s = open_session(opts);
  const auto data = load_data(s.cfg);
  const auto& panel = data.panel;
  const Rows train = rows_in(panel.calendar(), s.cfg.run.train, "train");
  const Rows valid = rows_in(panel.calendar(), s.cfg.run.valid, "valid");
  auto lib = workspace_library(s);
  agents::SignalCache signals(panel);
  agents::MemoryStore memory;
  const agents::Screener screener(panel, s.cfg.run.screener);
  std::optional<agents::RegimeAssessment> regime;
  try {
    const agents::RegimeAssessor assessor(panel, train.first, train.last, s.cfg.run.regime);
    regime = assessor.assess(valid.last);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientHistory) throw;
    spdlog::warn("regime assessment disabled: {}", e.what());
  }
  const auto policy = backend_for(s.cfg.run);
  const auto res = screener.cycle(lib, signals, memory, valid.last, regime, policy.get());
  ordered_json entries = ordered_json::array();
  for (const auto& e : res.ensemble) {
    ordered_json j = agents::to_json(e);
    j["expression"] = lib.find(e.factor_id)->expression;
    entries.push_back(std::move(j));
  }
  ordered_json out;
  out["day"] = panel.calendar()[valid.last].to_string();
  out["skipped"] = res.skipped;
  out["ensemble"] = entries;
  out["regime"] = regime ? agents::to_json(*regime) : ordered_json(nullptr);
  const std::string text = out.dump(2) + "\n";
  if (!opts.out.empty()) write(opts.out, text);
  os << text;
}

void cmd_backtest(const Options& opts, const fs::path& ensemble_path, std::ostream& os) {
  const Session s = open_session(opts);
  const fs::path ens_file = !ensemble_path.empty() ? ensemble_path : s.cfg.backtest_ensemble;
  if (ens_file.empty()) throw Error(ErrorCode::ConfigError, "backtest needs --ensemble or [backtest] ensemble");
  const auto data = load_data(s.cfg);
  const auto& panel = data.panel;
  const auto profile = exchange::MarketProfile::for_market(s.cfg.run.market);
  const strategy::Theta theta =
      s.cfg.backtest_theta
          ? *s.cfg.backtest_theta
          : agents::fixed_theta(profile, agents::effective_gamma(s.cfg.run.trader, profile));

  std::vector<strategy::EnsembleEntry> ensemble;
  std::map<std::string, Matrix> owned;
  ordered_json ens;
  try {
    ens = ordered_json::parse(io::read_file(ens_file));
    const ordered_json& list = ens.is_array() ? ens : ens.at("ensemble");
    for (const auto& e : list) {
      strategy::EnsembleEntry entry;
      entry.factor_id = e.at("factor_id").get<std::string>();
      entry.weight = e.at("weight").get<double>();
      entry.direction = e.at("direction").get<int>();
      const auto hint = strategy::parse_hint(e.value("hint", std::string("zscore")));
      if (!hint) throw Error(ErrorCode::ConfigError, "ensemble: unknown hint");
      entry.hint = *hint;
      owned.emplace(entry.factor_id, dsl::evaluate(dsl::parse(e.at("expression").get<std::string>()), panel));
      ensemble.push_back(entry);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ConfigError, "ensemble file: " + std::string(e.what()));
  }
  if (ensemble.empty()) throw Error(ErrorCode::EmptyEnsemble, "ensemble file lists no factors");
  std::map<std::string, const Matrix*> signals;
  for (const auto& [id, m] : owned) signals[id] = &m;

  Rows bt = rows_in(panel.calendar(), s.cfg.run.backtest, "backtest");
  bt.first = std::max<std::size_t>(bt.first, 1);
  const auto bars = strategy::build_day_bars(panel);
  strategy::BacktestOptions bo;
  bo.initial_cash = s.cfg.run.initial_capital;
  const auto res = strategy::run_backtest(panel, bars, ensemble, signals, theta, profile, bt.first,
                                          bt.last, bo);

  metrics::EquityCurve curve;
  curve.days.push_back(panel.calendar()[bt.first - 1]);
  curve.values.push_back(bo.initial_cash);
  curve.days.insert(curve.days.end(), res.days.begin(), res.days.end());
  curve.values.insert(curve.values.end(), res.nav.begin(), res.nav.end());
  curve.market = s.cfg.run.market;
  curve.days_per_year = profile.days_per_year;
  curve.rf_annual = profile.rf_annual;

  std::string equity = "day,nav,net_position_rate\n";
  for (std::size_t i = 0; i < curve.values.size(); ++i) {
    equity += curve.days[i].to_string() + "," + io::format_double(curve.values[i]) + "," +
              io::format_double(i == 0 ? 0.0 : res.net_position_rate[i - 1]) + "\n";
  }
  const fs::path dir = artifact_dir(s, "backtest");
  write(dir / "config.ini", s.config_text);
  write(dir / "equity.csv", equity);
  write(dir / "trades.csv", exchange::trade_log_csv(res.trades));
  const auto rep = metrics::compute(curve);
  write(dir / "metrics.json", metrics::to_json(rep).dump(2) + "\n");
  ordered_json m = base_manifest(s, data, "backtest");
  m["seed"] = s.cfg.run.seed;
  m["profile"] = std::string(profile_name(s.cfg.run.market));
  m["theta"] = agents::to_json(theta);
  m["ensemble"] = ens;
  write(dir / "manifest.json", m.dump(2) + "\n");
  ordered_json out;
  out["run_dir"] = dir.string();
  out["metrics"] = metrics::to_json(rep);
  os << out.dump(2) << "\n";
}

fs::path cmd_run(const Options& opts, std::optional<agents::Ablation> ablation, std::ostream& os) {
  Session s = open_session(opts);
  if (ablation) s.cfg.run.ablation = *ablation;
  const auto data = load_data(s.cfg);
  const auto policy = backend_for(s.cfg.run);
  auto res = agents::run_loop(data.panel, s.cfg.run, workspace_library(s), policy.get());

  const fs::path dir = artifact_dir(s, ablation ? "ablate" : "run");
  write(dir / "config.ini", s.config_text);
  write(dir / "equity.csv", res.equity_csv());
  write(dir / "trades.csv", res.trades_csv());
  write(dir / "snapshots.jsonl", res.snapshots_jsonl());
  write(dir / "memory.jsonl", res.memory.dump());
  write(dir / "regime.csv", agents::assessments_csv(res.assessments));
  write(dir / "library_snapshots.jsonl", res.library_snapshots_jsonl());
  fs::remove_all(dir / "factors");
  save_library(res.library, dir / "factors");

  const auto profile = exchange::MarketProfile::for_market(s.cfg.run.market);
  metrics::EquityCurve curve{res.curve_days, res.curve, s.cfg.run.market, profile.days_per_year,
                             profile.rf_annual};
  ordered_json metrics_json = nullptr;
  if (curve.periods() >= 1) {
    metrics_json = metrics::to_json(metrics::compute(curve));
    write(dir / "metrics.json", metrics_json.dump(2) + "\n");
  }
  ordered_json m = base_manifest(s, data, ablation ? "ablate" : "run");
  for (const auto& [k, v] : res.manifest.items()) {
    if (k != "config") m[k] = v;
  }
  write(dir / "manifest.json", m.dump(2) + "\n");

  ordered_json out;
  out["run_dir"] = dir.string();
  out["ablation"] = std::string(agents::to_string(s.cfg.run.ablation));
  out["metrics"] = metrics_json;
  os << out.dump(2) << "\n";
  return dir;
}

void cmd_ablate(const Options& opts, const std::string& mode, std::ostream& os) {
  std::vector<agents::Ablation> modes;
  if (mode.empty() || mode == "all") {
    modes = {agents::Ablation::NoMiner, agents::Ablation::NoScreener, agents::Ablation::NoTrader};
  } else {
    modes = {agents::parse_ablation(mode)};
  }
  for (const auto a : modes) {
    Options o = opts;
    if (modes.size() > 1) {
      std::string tag(agents::to_string(a));
      if (!o.out.empty()) o.out = o.out / tag;
      else if (!o.id.empty()) o.id += "-" + tag;
    }
    cmd_run(o, a, os);
  }
}

void cmd_analyze(const std::string& what, const fs::path& run_dir, std::ostream& os) {
  static const std::vector<std::string> kinds = {"decay", "coherence", "exposure", "diversity",
                                                 "friction"};
  if (what != "all" && std::find(kinds.begin(), kinds.end(), what) == kinds.end()) {
    throw Error(ErrorCode::ConfigError, "unknown analysis '" + what + "'");
  }
  const RunArtifacts a = open_run(run_dir);
  std::optional<LoadedPanel> data;
  const auto panel = [&]() -> const LoadedPanel& {
    if (!data) {
      data = load_data(a.session.cfg);
      check_data(a, *data);
    }
    return *data;
  };
  for (const auto& k : kinds) {
    if (what != "all" && what != k) continue;
    if (k == "decay") analyze_decay(a, panel(), os);
    if (k == "coherence") analyze_coherence(a, os);
    if (k == "exposure") analyze_exposure(a, panel(), os);
    if (k == "diversity") analyze_diversity(a, os);
    if (k == "friction") analyze_friction(a, os);
  }
}

void cmd_report(const std::vector<fs::path>& run_dirs, std::ostream& os) {
  if (run_dirs.empty()) throw Error(ErrorCode::ConfigError, "report needs at least one --run");
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %-12s %10s %10s %10s\n", "run", "ablation", "AR", "SR", "MDD");
  os << line;
  for (const auto& dir : run_dirs) {
    const auto manifest = ordered_json::parse(io::read_file(dir / "manifest.json"));
    const auto eq = read_equity(dir / "equity.csv");
    const MarketId market = parse_market(manifest.value("profile", std::string("us")));
    const auto profile = exchange::MarketProfile::for_market(market);
    metrics::EquityCurve curve{eq.days, eq.nav, market, profile.days_per_year, profile.rf_annual};
    std::string ar = "n/a", sr = "undefined", mdd = "n/a";
    if (curve.periods() >= 1) {
      const auto rep = metrics::compute(curve);
      ar = rep.ruined ? "ruined" : percent(rep.ar);
      if (rep.sr) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", *rep.sr);
        sr = buf;
      }
      mdd = percent(rep.mdd);
    }
    std::snprintf(line, sizeof line, "%-28s %-12s %10s %10s %10s\n",
                  dir.filename().string().c_str(),
                  manifest.value("ablation", std::string("-")).c_str(), ar.c_str(), sr.c_str(),
                  mdd.c_str());
    os << line;
  }
}

std::vector<exchange::TradeRecord> parse_trades_csv(const std::string& text) {
  std::vector<exchange::TradeRecord> out;
  const auto lines = lines_of(text);
  if (lines.empty() || lines[0] + "\n" != exchange::trade_log_header()) {
    throw Error(ErrorCode::CorruptRecord, "trades.csv: unexpected header");
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto c = io::split(lines[i], ',');
    if (c.size() != 8) throw Error(ErrorCode::CorruptRecord, "trades.csv: expected 8 columns");
    exchange::TradeRecord r;
    r.day = parse_day(c[0], "trades.csv");
    const auto id = io::parse_int(c[1]);
    const auto qty = io::parse_int(c[4]);
    const auto px = io::parse_double(c[5]);
    const auto fee = io::parse_double(c[6]);
    if (!id || !qty || !px || !fee) throw Error(ErrorCode::CorruptRecord, "trades.csv: bad number");
    r.order_id = static_cast<exchange::OrderId>(*id);
    r.asset = c[2];
    r.side = parse_side(c[3]);
    r.qty = *qty;
    r.price = *px;
    r.commission = *fee;
    r.status = parse_status(c[7]);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace alphaloop::cli
