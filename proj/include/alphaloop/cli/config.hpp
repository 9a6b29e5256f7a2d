#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "alphaloop/agents/run.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/strategy/reference.hpp"

namespace alphaloop::cli {

/// Where the panel comes from: a data directory or a synthetic spec.
struct DataSource {
  std::filesystem::path dir;
  std::filesystem::path synthetic;
};

struct AnalysisConfig {
  std::size_t decay_block = 126;
  std::size_t decay_k = 20;
};

struct CliConfig {
  agents::RunConfig run;
  DataSource data;
  std::filesystem::path workspace = ".";
  std::optional<strategy::Theta> backtest_theta;  // fixed theta when unset
  std::filesystem::path backtest_ensemble;        // ensemble JSON for `backtest`
  AnalysisConfig analysis;
};

/// Sectioned key = value text. Relative paths resolve against `base_dir`.
/// Unknown sections or keys and malformed values throw ConfigError.
CliConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = ".");
CliConfig load_config(const std::filesystem::path& path);

/// Every key with its default value.
std::string example_config();

/// 2 for configuration problems, 3 for bad input data, 4 otherwise.
int exit_code_for(ErrorCode code);

}  // namespace alphaloop::cli
