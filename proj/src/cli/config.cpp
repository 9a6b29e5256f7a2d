#include "alphaloop/cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <map>
#include <set>
#include <sstream>

#include "alphaloop/core/io.hpp"

namespace alphaloop::cli {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad(const std::string& key, const std::string& why) {
  throw Error(ErrorCode::ConfigError, "config " + key + ": " + why);
}

// Reads typed values out of one section and remembers which keys were used.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    used_.insert(key);
    if (!tree_) return std::nullopt;
    const auto v = tree_->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return std::string(io::trim(*v));
  }

  void text(const std::string& key, std::string& out) {
    if (auto v = raw(key)) out = *v;
  }

  template <typename T>
  void number(const std::string& key, T& out) {
    const auto v = raw(key);
    if (!v || v->empty()) return;
    if constexpr (std::is_floating_point_v<T>) {
      const auto d = io::parse_double(*v);
      if (!d) bad(where(key), "expected a number, got '" + *v + "'");
      out = static_cast<T>(*d);
    } else {
      const auto i = io::parse_int(*v);
      if (!i || (*i < 0 && std::is_unsigned_v<T>)) bad(where(key), "expected an integer, got '" + *v + "'");
      out = static_cast<T>(*i);
    }
  }

  void flag(const std::string& key, bool& out) {
    const auto v = raw(key);
    if (!v || v->empty()) return;
    if (*v == "true" || *v == "1" || *v == "yes") out = true;
    else if (*v == "false" || *v == "0" || *v == "no") out = false;
    else bad(where(key), "expected true or false, got '" + *v + "'");
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& out) {
    const auto v = raw(key);
    if (!v) return;
    out.clear();
    if (v->empty()) return;
    for (const auto& part : io::split(*v, ',')) {
      const std::string item(io::trim(part));
      if constexpr (std::is_same_v<T, std::string>) {
        out.push_back(item);
      } else {
        const auto i = io::parse_int(item);
        if (!i) bad(where(key), "expected integers, got '" + item + "'");
        out.push_back(static_cast<T>(*i));
      }
    }
  }

  std::optional<Date> date(const std::string& key) {
    const auto v = raw(key);
    if (!v || v->empty()) return std::nullopt;
    const auto d = Date::parse(*v);
    if (!d) bad(where(key), "expected YYYY-MM-DD, got '" + *v + "'");
    return d;
  }

  void check_unknown() const {
    if (!tree_) return;
    for (const auto& [k, _] : *tree_) {
      if (!used_.count(k)) bad("[" + name_ + "]", "unknown key '" + k + "'");
    }
  }

  std::string where(const std::string& key) const { return "[" + name_ + "] " + key; }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

DateRange required_range(Section& s, const std::string& name) {
  const auto start = s.date(name + "_start");
  const auto end = s.date(name + "_end");
  if (!start || !end) bad("[dates]", name + "_start and " + name + "_end are required");
  return {*start, *end};
}

}  // namespace

CliConfig parse_config(std::string_view text, const fs::path& base_dir) {
  pt::ptree root;
  try {
    std::istringstream in{std::string(text)};
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, std::string("config: ") + e.message() + " at line " +
                                            std::to_string(e.line()));
  }
  std::map<std::string, Section> sections;
  for (const char* name : {"workspace", "data", "run", "dates", "miner", "screener", "trader",
                           "regime", "policy", "backtest", "analysis"}) {
    const auto child = root.get_child_optional(name);
    sections.emplace(name, Section(child ? &*child : nullptr, name));
  }
  for (const auto& [k, v] : root) {
    if (!sections.count(k)) bad("[" + k + "]", "unknown section");
    if (!v.data().empty()) bad(k, "keys must sit inside a section");
  }

  CliConfig c;
  agents::RunConfig& r = c.run;

  std::string root_dir;
  sections.at("workspace").text("root", root_dir);
  if (!root_dir.empty()) c.workspace = resolve(base_dir, root_dir);

  auto& data = sections.at("data");
  std::string dir, synth;
  data.text("dir", dir);
  data.text("synthetic", synth);
  c.data.dir = resolve(base_dir, dir);
  c.data.synthetic = resolve(base_dir, synth);
  if (!dir.empty() && !synth.empty()) bad("[data]", "set either dir or synthetic, not both");
  for (const auto& p : {c.data.dir, c.data.synthetic}) {
    if (!p.empty() && !fs::exists(p)) bad("[data]", "path does not exist: " + p.string());
  }

  auto& run = sections.at("run");
  std::string profile = "us", ablation = "NONE";
  run.text("profile", profile);
  try {
    r.market = parse_market(profile);
  } catch (const Error& e) {
    bad("[run] profile", e.what());
  }
  run.number("seed", r.seed);
  run.number("initial_capital", r.initial_capital);
  if (!(r.initial_capital > 0.0)) bad("[run] initial_capital", "must be positive");
  run.text("ablation", ablation);
  r.ablation = agents::parse_ablation(ablation);

  auto& dates = sections.at("dates");
  r.train = required_range(dates, "train");
  r.valid = required_range(dates, "valid");
  r.backtest = required_range(dates, "backtest");
  agents::validate_ranges(r);

  auto& m = sections.at("miner");
  m.number("budget", r.miner.budget);
  m.number("max_new", r.miner.max_new);
  m.number("cadence", r.miner.cadence);
  m.number("window", r.miner.window);
  m.number("revisit", r.miner.revisit);
  m.list("transforms", r.miner.transforms);
  m.list("ops", r.miner.ops);
  m.list("fields", r.miner.fields);
  m.list("windows", r.miner.windows);
  m.number("ic_min", r.miner.acceptance.ic_min);
  m.number("icir_min", r.miner.acceptance.icir_min);
  m.number("coverage_min", r.miner.acceptance.coverage_min);
  m.number("turnover_max", r.miner.acceptance.turnover_max);
  m.flag("rank_ic", r.miner.validation.rank_ic);
  m.number("max_horizon", r.miner.validation.max_horizon);
  if (r.miner.cadence < 1 || r.miner.window < 2) bad("[miner]", "cadence >= 1 and window >= 2");

  auto& s = sections.at("screener");
  s.number("min_factors", r.screener.min_factors);
  s.number("k", r.screener.k);
  s.number("corr_threshold", r.screener.corr_threshold);
  s.number("icir_window", r.screener.icir_window);
  s.number("corr_window", r.screener.corr_window);
  std::string hint;
  s.text("hint", hint);
  if (!hint.empty()) {
    const auto h = strategy::parse_hint(hint);
    if (!h) bad("[screener] hint", "unknown transform hint '" + hint + "'");
    r.screener.hint = *h;
  }

  auto& t = sections.at("trader");
  t.list("n_long", r.trader.n_long);
  t.list("n_short", r.trader.n_short);
  t.number("beta", r.trader.beta);
  double gamma = kMissing;
  t.number("gamma", gamma);
  if (!is_missing(gamma)) r.trader.gamma = gamma;
  t.number("lookback", r.trader.lookback);
  t.number("lambda", r.trader.lambda);
  t.number("high_vol_exposure_scale", r.trader.high_vol_exposure_scale);
  t.number("high_vol_level", r.trader.high_vol_level);
  if (r.trader.n_long.empty() || r.trader.n_short.empty()) bad("[trader]", "empty theta grid");

  auto& g = sections.at("regime");
  g.number("trend_window", r.regime.trend_window);
  g.number("vol_window", r.regime.vol_window);
  g.number("corr_window", r.regime.corr_window);
  g.number("sigma_ann", r.regime.sigma_ann);
  g.flag("full_sample_quantiles", r.regime.full_sample_quantiles);

  auto& p = sections.at("policy");
  std::string kind = "deterministic";
  p.text("kind", kind);
  r.policy = agents::parse_policy_kind(kind);
  p.text("command", r.policy_command);
  if (r.policy == agents::PolicyKind::External && r.policy_command.empty()) {
    bad("[policy] command", "required for the external policy");
  }

  auto& b = sections.at("backtest");
  const auto prof = exchange::MarketProfile::for_market(r.market);
  strategy::Theta th = agents::fixed_theta(prof, agents::effective_gamma(r.trader, prof));
  const auto nl = b.raw("n_long"), ns = b.raw("n_short"), be = b.raw("beta"), ga = b.raw("gamma");
  const bool any = (nl && !nl->empty()) || (ns && !ns->empty()) || (be && !be->empty()) || (ga && !ga->empty());
  const auto as_int = [&](const std::optional<std::string>& v, const char* key, int& out) {
    if (!v || v->empty()) return;
    const auto i = io::parse_int(*v);
    if (!i) bad(std::string("[backtest] ") + key, "expected an integer");
    out = static_cast<int>(*i);
  };
  const auto as_double = [&](const std::optional<std::string>& v, const char* key, double& out) {
    if (!v || v->empty()) return;
    const auto d = io::parse_double(*v);
    if (!d) bad(std::string("[backtest] ") + key, "expected a number");
    out = *d;
  };
  as_int(nl, "n_long", th.n_long);
  as_int(ns, "n_short", th.n_short);
  as_double(be, "beta", th.beta);
  as_double(ga, "gamma", th.gamma);
  if (any) c.backtest_theta = th;
  std::string ens;
  b.text("ensemble", ens);
  c.backtest_ensemble = resolve(base_dir, ens);

  auto& a = sections.at("analysis");
  a.number("decay_block", c.analysis.decay_block);
  a.number("decay_k", c.analysis.decay_k);
  if (c.analysis.decay_block < 2) bad("[analysis] decay_block", "must be at least 2");

  for (const auto& [_, sec] : sections) sec.check_unknown();
  return c;
}

CliConfig load_config(const fs::path& path) {
  std::string text;
  try {
    text = io::read_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::ConfigError, std::string("cannot read config: ") + e.what());
  }
  return parse_config(text, path.parent_path().empty() ? fs::path(".") : path.parent_path());
}

std::string example_config() {
  const agents::RunConfig d;
  const auto join = [](const auto& xs) {
    std::string out;
    for (const auto& x : xs) {
      if (!out.empty()) out += ",";
      if constexpr (std::is_same_v<std::decay_t<decltype(x)>, std::string>) out += x;
      else out += std::to_string(x);
    }
    return out;
  };
  const auto num = [](double v) { return io::format_double(v); };
  std::string s;
  s += "; alphaloop configuration. Every key is shown with its default.\n";
  s += "; ALPHALOOP_WORKSPACE overrides [workspace] root.\n\n";
  s += "[workspace]\nroot = .\n\n";
  s += "[data]\n; a panel directory or a synthetic spec (JSON), one of the two\ndir =\nsynthetic =\n\n";
  s += "[run]\nprofile = us\nseed = " + std::to_string(d.seed) +
       "\ninitial_capital = " + num(d.initial_capital) + "\nablation = NONE\n\n";
  s += "[dates]\ntrain_start = 2020-01-01\ntrain_end = 2020-06-30\n"
       "valid_start = 2020-07-01\nvalid_end = 2020-08-31\n"
       "backtest_start = 2020-09-01\nbacktest_end = 2021-11-30\n\n";
  const auto& m = d.miner;
  s += "[miner]\nbudget = " + std::to_string(m.budget) + "\nmax_new = " + std::to_string(m.max_new) +
       "\ncadence = " + std::to_string(m.cadence) + "\nwindow = " + std::to_string(m.window) +
       "\nrevisit = " + std::to_string(m.revisit) + "\ntransforms = " + join(m.transforms) +
       "\nops = " + join(m.ops) + "\n; empty: open,high,low,close,volume plus loaded fundamentals\nfields =\nwindows = " +
       join(m.windows) + "\nic_min = " + num(m.acceptance.ic_min) +
       "\nicir_min = " + num(m.acceptance.icir_min) + "\ncoverage_min = " +
       num(m.acceptance.coverage_min) + "\nturnover_max = " + num(m.acceptance.turnover_max) +
       "\nrank_ic = false\nmax_horizon = " + std::to_string(m.validation.max_horizon) + "\n\n";
  const auto& sc = d.screener;
  s += "[screener]\nmin_factors = " + std::to_string(sc.min_factors) + "\nk = " +
       std::to_string(sc.k) + "\ncorr_threshold = " + num(sc.corr_threshold) +
       "\nicir_window = " + std::to_string(sc.icir_window) + "\ncorr_window = " +
       std::to_string(sc.corr_window) + "\nhint = " + std::string(strategy::to_string(sc.hint)) +
       "\n\n";
  const auto& t = d.trader;
  s += "[trader]\nn_long = " + join(t.n_long) + "\nn_short = " + join(t.n_short) +
       "\nbeta = " + num(t.beta) + "\n; empty: 1 on csi (long only), 0.5 on us\ngamma =\nlookback = " +
       std::to_string(t.lookback) + "\nlambda = " + num(t.lambda) +
       "\nhigh_vol_exposure_scale = " + num(t.high_vol_exposure_scale) +
       "\nhigh_vol_level = " + std::to_string(t.high_vol_level) + "\n\n";
  const auto& g = d.regime;
  s += "[regime]\ntrend_window = " + std::to_string(g.trend_window) + "\nvol_window = " +
       std::to_string(g.vol_window) + "\ncorr_window = " + std::to_string(g.corr_window) +
       "\nsigma_ann = " + num(g.sigma_ann) + "\nfull_sample_quantiles = false\n\n";
  s += "[policy]\n; deterministic or external\nkind = deterministic\n"
       "; external: shell command reading one JSON request per line\ncommand =\n\n";
  s += "[backtest]\n; theta for the backtest command; empty keys take the fixed theta\n"
       "n_long =\nn_short =\nbeta =\ngamma =\nensemble =\n\n";
  s += "[analysis]\ndecay_block = 126\ndecay_k = 20\n";
  return s;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ConfigError:
    case ErrorCode::InvalidTheta:
      return 2;
    case ErrorCode::MalformedCsv:
    case ErrorCode::OhlcViolation:
    case ErrorCode::EmptyUniverse:
    case ErrorCode::DateOutOfRange:
    case ErrorCode::CorruptRecord:
    case ErrorCode::DuplicateFactorId:
    case ErrorCode::IoError:
    case ErrorCode::SyntaxError:
    case ErrorCode::UnknownFunction:
    case ErrorCode::UnknownField:
    case ErrorCode::ArityError:
    case ErrorCode::BadWindow:
      return 3;
    default:
      return 4;
  }
}

}  // namespace alphaloop::cli
