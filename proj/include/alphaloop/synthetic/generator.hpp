#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/date.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::synthetic {

/// From `start_day` on, returns load on the cross-sectional z-score of
/// `driver` observed the previous day.
struct Regime {
  int start_day = 0;
  std::string driver;
  double strength = 0.0;
};

struct SyntheticSpec {
  std::uint64_t seed = 1;
  int assets = 20;
  int days = 500;
  Date start = Date::from_ymd(2020, 1, 1);
  MarketId profile = MarketId::UsLike;
  double start_price = 50.0;
  double base_volume = 1e6;
  // market factor: constant drift, volatility alternating in blocks
  double drift = 0.0002;
  double vol_low = 0.006;
  double vol_high = 0.02;
  int block_days = 60;
  double idio_vol = 0.01;
  std::vector<Regime> regimes;
  bool fundamentals = false;
};

/// Parses the JSON form; unknown keys are rejected. Throws ConfigError.
SyntheticSpec parse_spec(std::string_view json_text);
std::string spec_to_json(const SyntheticSpec& spec);

/// Deterministic in `spec`, seed included. Throws ConfigError on a bad
/// driver expression or non-positive sizes.
PricePanel generate(const SyntheticSpec& spec);

}  // namespace alphaloop::synthetic
