#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "alphaloop/cli/commands.hpp"
#include "alphaloop/cli/config.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/panel/loader.hpp"
#include "doctest.h"

using namespace alphaloop;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("alphaloop_cli_" + std::to_string(std::hash<std::string>{}(
                                   std::to_string(reinterpret_cast<std::uintptr_t>(this)) +
                                   std::to_string(std::rand()))));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

const char* kSpec = R"spec({"seed":3,"assets":12,"days":220,"start":"2020-01-01",
  "regimes":[{"start_day":0,"driver":"ts_mean(volume,5)","strength":0.005}]})spec";

std::string config_for(const fs::path& spec, const std::string& extra = "") {
  std::string c = cli::example_config();
  const auto put = [&](const std::string& key, const std::string& value) {
    const auto at = c.find("\n" + key + " =");
    REQUIRE(at != std::string::npos);
    const auto eol = c.find('\n', at + 1);
    c.replace(at + 1, eol - at - 1, key + " = " + value);
  };
  put("synthetic", spec.string());
  put("train_end", "2020-04-30");
  put("valid_start", "2020-05-01");
  put("valid_end", "2020-05-29");
  put("backtest_start", "2020-06-01");
  put("windows", "5");
  put("budget", "30");
  put("lookback", "40");
  return c + extra;
}

std::string contents_digest(const fs::path& dir) {
  std::string all;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) all += e.path().string() + io::read_file(e.path());
  }
  return io::hex64(io::fnv1a64(all));
}

}  // namespace

TEST_CASE("example config restates every default") {
  const auto c = cli::parse_config(cli::example_config());
  agents::RunConfig d;
  d.train = c.run.train;
  d.valid = c.run.valid;
  d.backtest = c.run.backtest;
  CHECK(agents::to_json(c.run).dump() == agents::to_json(d).dump());
  CHECK_FALSE(c.run.trader.gamma.has_value());
  CHECK_FALSE(c.backtest_theta.has_value());
  CHECK(c.analysis.decay_block == 126);
  CHECK(c.analysis.decay_k == 20);
}

TEST_CASE("config errors") {
  const std::string base = cli::example_config();
  const auto code_of = [](const std::string& text) {
    try {
      cli::parse_config(text);
    } catch (const Error& e) {
      return std::optional<ErrorCode>(e.code());
    }
    return std::optional<ErrorCode>();
  };
  CHECK(code_of(base + "\n[miner]\nbudgett = 3\n") == ErrorCode::ConfigError);
  CHECK(code_of(base + "\n[nonsense]\nx = 1\n") == ErrorCode::ConfigError);
  std::string bad = base;
  bad.replace(bad.find("budget = 40"), 11, "budget = x");
  CHECK(code_of(bad) == ErrorCode::ConfigError);
  std::string overlap = base;
  overlap.replace(overlap.find("valid_start = 2020-07-01"), 24, "valid_start = 2020-06-01");
  CHECK(code_of(overlap) == ErrorCode::ConfigError);
  std::string missing = base;
  missing.replace(missing.find("synthetic ="), 11, "synthetic = /no/such/spec.json");
  CHECK(code_of(missing) == ErrorCode::ConfigError);

  std::string theta = base;
  const std::string blank = "n_long =\nn_short =\nbeta =\ngamma =\n";
  theta.replace(theta.find(blank), blank.size(), "n_long = 4\nn_short =\nbeta = 0.5\ngamma = 1\n");
  const auto c = cli::parse_config(theta);
  REQUIRE(c.backtest_theta.has_value());
  CHECK(*c.backtest_theta == strategy::Theta{4, 10, 0.5, 1.0});

  CHECK(cli::exit_code_for(ErrorCode::ConfigError) == 2);
  CHECK(cli::exit_code_for(ErrorCode::MalformedCsv) == 3);
  CHECK(cli::exit_code_for(ErrorCode::OhlcViolation) == 3);
  CHECK(cli::exit_code_for(ErrorCode::InsufficientCash) == 4);
}

TEST_CASE("commands end to end") {
  TempDir tmp;
  const fs::path spec = tmp.path / "spec.json";
  io::write_file_atomic(spec, kSpec);
  const fs::path cfg = tmp.path / "cfg.ini";
  io::write_file_atomic(cfg, config_for(spec));
  setenv("ALPHALOOP_WORKSPACE", (tmp.path / "ws").c_str(), 1);

  cli::Options o;
  o.config = cfg;
  std::ostringstream sink;

  SUBCASE("ingest writes a loadable cache and leaves inputs alone") {
    cli::Options io_opts;
    io_opts.out = tmp.path / "panel";
    cli::cmd_ingest(io_opts, spec, sink);
    const auto p = load_panel(tmp.path / "panel", MarketId::UsLike);
    CHECK(p.num_days() == 220);
    CHECK(p.num_assets() == 12);

    // the cache as a data directory; a run must not touch it
    const std::string before = contents_digest(tmp.path / "panel");
    std::string text = config_for(spec);
    text.replace(text.find("synthetic = "), text.find('\n', text.find("synthetic = ")) - text.find("synthetic = "),
                 "synthetic =");
    text.replace(text.find("\ndir =") + 1, 5, "dir = " + (tmp.path / "panel").string());
    io::write_file_atomic(tmp.path / "dir.ini", text);
    cli::Options d;
    d.config = tmp.path / "dir.ini";
    d.id = "fromdir";
    cli::cmd_run(d, std::nullopt, sink);
    CHECK(contents_digest(tmp.path / "panel") == before);
    CHECK(fs::exists(tmp.path / "ws" / "runs" / "fromdir" / "equity.csv"));
  }

  SUBCASE("run is repeatable and records a manifest") {
    o.id = "a";
    const auto a = cli::cmd_run(o, std::nullopt, sink);
    o.id = "b";
    const auto b = cli::cmd_run(o, std::nullopt, sink);
    CHECK(a == tmp.path / "ws" / "runs" / "a");
    CHECK(io::read_file(a / "equity.csv") == io::read_file(b / "equity.csv"));
    CHECK(io::read_file(a / "memory.jsonl") == io::read_file(b / "memory.jsonl"));
    const auto m = nlohmann::json::parse(io::read_file(a / "manifest.json"));
    CHECK(m["seed"] == 42);
    CHECK(m["data"]["checksum"].get<std::string>().size() == 16);
    CHECK(m["ablation"] == "NONE");
    for (const char* f : {"config.ini", "trades.csv", "snapshots.jsonl", "regime.csv",
                          "library_snapshots.jsonl", "metrics.json"}) {
      CHECK(fs::exists(a / f));
    }

    std::ostringstream out;
    cli::cmd_analyze("all", a, out);
    for (const char* f : {"decay_report.csv", "coherence_trend.csv", "coherence_vol.svg",
                          "exposure.csv", "exposure_fit.json", "diversity.json", "friction.csv"}) {
      CHECK(fs::exists(a / f));
    }
    CHECK_THROWS_AS(cli::cmd_analyze("astrology", a, out), Error);

    // the friction file agrees with the trade log it came from
    const auto trades = cli::parse_trades_csv(io::read_file(a / "trades.csv"));
    CHECK(exchange::trade_log_csv(trades) == io::read_file(a / "trades.csv"));

    cli::Options seeded = o;
    seeded.id = "c";
    seeded.seed = 7;
    const auto c = cli::cmd_run(seeded, std::nullopt, sink);
    CHECK(nlohmann::json::parse(io::read_file(c / "manifest.json"))["seed"] == 7);
  }

  SUBCASE("ablate no-trader") {
    o.id = "nt";
    cli::cmd_ablate(o, "no-trader", sink);
    const auto m = nlohmann::json::parse(io::read_file(tmp.path / "ws" / "runs" / "nt" / "manifest.json"));
    CHECK(m["ablation"] == "NO_TRADER");
  }

  SUBCASE("report on a flat curve") {
    std::string text = config_for(spec);
    text.replace(text.find("min_factors = 3"), 15, "min_factors = 99");
    io::write_file_atomic(cfg, text);
    o.id = "flat";
    const auto dir = cli::cmd_run(o, std::nullopt, sink);
    std::ostringstream out;
    cli::cmd_report({dir}, out);
    const std::string table = out.str();
    CHECK(table.find("0.00%") != std::string::npos);
    CHECK(table.find("undefined") != std::string::npos);
    CHECK(table.find("-0.00%") == std::string::npos);
  }

  SUBCASE("mine, screen, backtest") {
    o.id = "m";
    cli::cmd_mine(o, sink);
    CHECK_FALSE(fs::is_empty(tmp.path / "ws" / "factors"));
    cli::Options s = o;
    s.out = tmp.path / "ensemble.json";
    std::ostringstream out;
    cli::cmd_screen(s, out);
    const auto ens = nlohmann::json::parse(io::read_file(s.out));
    CHECK(ens.contains("ensemble"));
    if (!ens["ensemble"].empty()) {
      cli::Options b = o;
      b.id = "bt";
      cli::cmd_backtest(b, s.out, sink);
      CHECK(fs::exists(tmp.path / "ws" / "runs" / "bt" / "metrics.json"));
    }
  }
  unsetenv("ALPHALOOP_WORKSPACE");
}
