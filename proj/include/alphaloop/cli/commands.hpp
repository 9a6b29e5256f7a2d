#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "alphaloop/agents/run.hpp"
#include "alphaloop/cli/config.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::cli {

/// Flags shared by the subcommands.
struct Options {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> profile;
  std::filesystem::path out;  // artifact directory; default <workspace>/runs/<id>
  std::string id;
};

/// Config file plus command-line overrides, with the workspace resolved
/// (ALPHALOOP_WORKSPACE wins over the file).
struct Session {
  CliConfig cfg;
  std::string config_text;
  std::filesystem::path config_dir;
  std::filesystem::path workspace;
  Options opts;
};

Session open_session(const Options& opts);

struct LoadedPanel {
  PricePanel panel;
  nlohmann::ordered_json source;  // kind, path, checksum
};

LoadedPanel load_data(const CliConfig& cfg);

void cmd_example_config(const std::filesystem::path& out, std::ostream& os);
void cmd_ingest(const Options& opts, const std::filesystem::path& synthetic, std::ostream& os);
void cmd_mine(const Options& opts, std::ostream& os);
void cmd_screen(const Options& opts, std::ostream& os);
void cmd_backtest(const Options& opts, const std::filesystem::path& ensemble, std::ostream& os);
std::filesystem::path cmd_run(const Options& opts, std::optional<agents::Ablation> ablation,
                              std::ostream& os);
/// `mode` is one ablation name or "all" for the three variants.
void cmd_ablate(const Options& opts, const std::string& mode, std::ostream& os);
/// what: decay, coherence, exposure, diversity, friction or all.
void cmd_analyze(const std::string& what, const std::filesystem::path& run_dir, std::ostream& os);
void cmd_report(const std::vector<std::filesystem::path>& run_dirs, std::ostream& os);

/// Reads back the trade log written by a run.
std::vector<exchange::TradeRecord> parse_trades_csv(const std::string& text);

}  // namespace alphaloop::cli
