#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "alphaloop/panel/panel.hpp"

namespace alphaloop {

/// Reserved file names inside a data directory; every other `*.csv` is one
/// asset's OHLCV history named by its stem.
inline constexpr std::string_view kFundamentalsFile = "fundamentals.csv";
inline constexpr std::string_view kUniverseFile = "universe.csv";
inline constexpr std::string_view kIndexFile = "index.csv";

/// Throws MalformedCsv, OhlcViolation (with file and row), EmptyUniverse.
PricePanel load_panel(const std::filesystem::path& data_dir, MarketId market);

/// Writes the panel in the same directory layout `load_panel` reads.
void write_panel(const PricePanel& panel, const std::filesystem::path& data_dir);

/// Deterministic text form of the whole panel (all files concatenated).
std::string serialize_panel(const PricePanel& panel);

}  // namespace alphaloop
