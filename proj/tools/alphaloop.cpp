#include <cstdlib>
#include <iostream>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "alphaloop/cli/commands.hpp"
#include "alphaloop/core/error.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace alphaloop;

namespace {

int fail(std::string_view code, const std::string& message, int exit_code) {
  nlohmann::ordered_json j;
  j["error"] = std::string(code);
  j["message"] = message;
  j["exit_code"] = exit_code;
  std::cerr << j.dump() << "\n";
  return exit_code;
}

void common_flags(CLI::App* app, cli::Options& o, std::string& seed, std::string& profile) {
  app->add_option("--config", o.config, "configuration file");
  app->add_option("--seed", seed, "overrides [run] seed");
  app->add_option("--profile", profile, "csi or us; overrides [run] profile");
  app->add_option("--out", o.out, "artifact directory");
  app->add_option("--id", o.id, "run id under <workspace>/runs");
}

}  // namespace

int main(int argc, char** argv) {
  // logs go to stderr so stdout stays machine-readable
  spdlog::set_default_logger(spdlog::stderr_color_mt("alphaloop"));
  if (const char* lvl = std::getenv("ALPHALOOP_LOG")) spdlog::set_level(spdlog::level::from_str(lvl));

  CLI::App app{"alphaloop: closed-loop factor research engine"};
  app.require_subcommand(1);
  cli::Options o;
  std::string seed, profile, mode, what = "all";
  fs::path synthetic, ensemble, example_out;
  std::vector<fs::path> runs;
  fs::path run_dir;

  auto* ingest = app.add_subcommand("ingest", "validate data and write a panel cache");
  common_flags(ingest, o, seed, profile);
  ingest->add_option("--synthetic", synthetic, "generate the panel from a synthetic spec (JSON)");
  auto* mine = app.add_subcommand("mine", "one miner cycle over the training window");
  common_flags(mine, o, seed, profile);
  auto* screen = app.add_subcommand("screen", "print the ensemble at the end of validation");
  common_flags(screen, o, seed, profile);
  auto* backtest = app.add_subcommand("backtest", "reference strategy with a fixed theta");
  common_flags(backtest, o, seed, profile);
  backtest->add_option("--ensemble", ensemble, "ensemble JSON (as printed by screen)");
  auto* run = app.add_subcommand("run", "closed loop over the backtest range");
  common_flags(run, o, seed, profile);
  auto* ablate = app.add_subcommand("ablate", "closed loop with one agent replaced");
  common_flags(ablate, o, seed, profile);
  ablate->add_option("--mode", mode, "no-miner, no-screener, no-trader or all")->default_val("all");
  auto* analyze = app.add_subcommand("analyze", "post-hoc analyses of a run directory");
  analyze->add_option("what", what, "decay, coherence, exposure, diversity, friction or all");
  analyze->add_option("--run", run_dir, "run directory")->required();
  auto* report = app.add_subcommand("report", "AR / SR / MDD table");
  report->add_option("--run", runs, "run directories")->required();
  auto* example = app.add_subcommand("example-config", "print a config with every default");
  example->add_option("--out", example_out, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail("ConfigError", e.what(), 2);
  }

  try {
    if (!seed.empty()) {
      try {
        o.seed = std::stoull(seed);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "--seed must be a non-negative integer");
      }
    }
    if (!profile.empty()) o.profile = profile;

    if (*ingest) cli::cmd_ingest(o, synthetic, std::cout);
    else if (*mine) cli::cmd_mine(o, std::cout);
    else if (*screen) cli::cmd_screen(o, std::cout);
    else if (*backtest) cli::cmd_backtest(o, ensemble, std::cout);
    else if (*run) cli::cmd_run(o, std::nullopt, std::cout);
    else if (*ablate) cli::cmd_ablate(o, mode, std::cout);
    else if (*analyze) cli::cmd_analyze(what, run_dir, std::cout);
    else if (*report) cli::cmd_report(runs, std::cout);
    else if (*example) cli::cmd_example_config(example_out, std::cout);
  } catch (const Error& e) {
    return fail(to_string(e.code()), e.what(), cli::exit_code_for(e.code()));
  } catch (const fs::filesystem_error& e) {
    return fail("IoError", e.what(), 3);
  } catch (const std::exception& e) {
    return fail("RuntimeError", e.what(), 4);
  }
  return 0;
}
