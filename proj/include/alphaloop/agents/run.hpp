#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alphaloop/agents/memory.hpp"
#include "alphaloop/agents/miner.hpp"
#include "alphaloop/agents/policy.hpp"
#include "alphaloop/agents/regime.hpp"
#include "alphaloop/agents/screener.hpp"
#include "alphaloop/agents/trader.hpp"
#include "alphaloop/dsl/reference.hpp"
#include "alphaloop/lab/library.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::agents {

enum class Ablation { None, NoMiner, NoScreener, NoTrader };

/// NONE, NO_MINER, NO_SCREENER, NO_TRADER.
std::string_view to_string(Ablation a);
/// Accepts the upper-case names and none|no-miner|no-screener|no-trader.
Ablation parse_ablation(std::string_view s);

struct RunConfig {
  MarketId market = MarketId::UsLike;
  std::uint64_t seed = 42;
  DateRange train;
  DateRange valid;
  DateRange backtest;
  double initial_capital = 10'000'000.0;
  MinerConfig miner;
  ScreenerConfig screener;
  TraderConfig trader;
  RegimeConfig regime;
  Ablation ablation = Ablation::None;
  PolicyKind policy = PolicyKind::Deterministic;
  std::string policy_command;
};

/// Throws ConfigError unless train < valid < backtest, each ordered.
void validate_ranges(const RunConfig& cfg);
nlohmann::ordered_json to_json(const RunConfig& cfg);

struct DayRecord {
  Date day;
  double nav = 0.0;
  double net_position_rate = 0.0;
  bool traded = false;
  std::optional<strategy::Theta> theta;
  std::vector<strategy::EnsembleEntry> ensemble;
};

struct EpisodeResult {
  /// Equity curve: the base day (start capital) followed by one value per traded day.
  std::vector<Date> curve_days;
  std::vector<double> curve;
  std::vector<DayRecord> days;
  std::vector<exchange::TradeRecord> trades;
  std::vector<std::string> snapshots;  // account JSON per day
  std::vector<RegimeAssessment> assessments;
  std::vector<LibrarySnapshot> library_snapshots;
  MemoryStore memory;
  lab::FactorLibrary library;
  nlohmann::ordered_json manifest;

  std::string equity_csv() const;
  std::string trades_csv() const;
  std::string snapshots_jsonl() const;
  std::string library_snapshots_jsonl() const;
};

/// Library used by the NO_MINER ablation: the classical set, all effective.
lab::FactorLibrary classical_library(const std::vector<dsl::ReferenceFactor>& refs);

/// The closed loop over cfg.backtest. `initial` seeds the factor library
/// (ignored under NO_MINER, which freezes the classical set).
EpisodeResult run_loop(const PricePanel& panel, const RunConfig& cfg,
                       lab::FactorLibrary initial = {},
                       PolicyBackend* policy = nullptr);

}  // namespace alphaloop::agents
