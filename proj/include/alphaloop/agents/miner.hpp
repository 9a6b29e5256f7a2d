#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "alphaloop/agents/memory.hpp"
#include "alphaloop/agents/policy.hpp"
#include "alphaloop/agents/signals.hpp"
#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/lab/library.hpp"
#include "alphaloop/lab/validation.hpp"
#include "alphaloop/panel/panel.hpp"

namespace alphaloop::agents {

struct MinerConfig {
  int budget = 40;    // candidate validations per cycle
  int max_new = 5;    // accepted factors per cycle
  int cadence = 63;   // trading days between cycles and between re-validations
  int window = 126;   // trailing validation window
  int revisit = 126;  // a canonical form is not re-tried within this many days
  std::vector<std::string> transforms = {"id", "cs_rank", "cs_zscore", "neg"};
  std::vector<std::string> ops = {"ts_mean", "ts_std", "ts_delta", "ts_rank", "ts_max", "ts_min"};
  /// Empty means price and volume fields plus any fundamentals in the panel.
  std::vector<std::string> fields;
  std::vector<int> windows = {5, 10, 20};
  lab::AcceptanceConfig acceptance;
  lab::ValidateOptions validation;
};

/// Heuristic category from the expression's fields and operators.
lab::Category classify(const dsl::Expr& e);

/// Template instantiations {transform}({ts_op}(field, w)) in a seeded order.
class CandidateGenerator {
 public:
  CandidateGenerator(const PricePanel& panel, const MinerConfig& cfg, std::uint64_t seed);

  std::size_t size() const { return pool_.size(); }
  const std::vector<dsl::Expr>& pool() const { return pool_; }
  /// Next candidate accepted by `eligible`, scanning at most one full lap.
  template <typename Pred>
  std::optional<dsl::Expr> next(Pred&& eligible) {
    for (std::size_t n = 0; n < pool_.size(); ++n) {
      const dsl::Expr& e = pool_[cursor_];
      cursor_ = (cursor_ + 1) % pool_.size();
      if (eligible(e)) return e;
    }
    return std::nullopt;
  }

 private:
  std::vector<dsl::Expr> pool_;
  std::size_t cursor_ = 0;
};

struct MinerCycleResult {
  int validated = 0;
  std::vector<std::string> accepted;
  std::vector<std::string> maintained;
  std::vector<std::string> deprecated;
  bool exhausted = false;
};

struct LibrarySnapshot {
  Date day;
  std::vector<std::pair<std::string, std::string>> effective;  // (factor_id, expression)
};

LibrarySnapshot snapshot_of(const lab::FactorLibrary& lib, Date day);
std::string to_json_line(const LibrarySnapshot& s);
LibrarySnapshot snapshot_from_json(std::string_view line);

class Miner {
 public:
  Miner(const PricePanel& panel, MinerConfig cfg, std::uint64_t seed);

  /// Generation then maintenance, validating on rows [window_first, row].
  /// Only data up to `row` is read.
  MinerCycleResult cycle(lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                         std::size_t row, std::size_t window_first,
                         PolicyBackend* policy = nullptr);

  /// Trailing window start for `row`.
  std::size_t window_start(std::size_t row) const;
  const MinerConfig& config() const { return cfg_; }
  const CandidateGenerator& generator() const { return gen_; }

 private:
  void generate(lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                std::size_t row, DateRange window, PolicyBackend* policy, MinerCycleResult& out);
  void maintain(lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                std::size_t row, DateRange window, MinerCycleResult& out);
  bool recently_tried(const MemoryStore& memory, const std::string& canonical,
                      std::size_t row) const;
  /// Validates and records one candidate; true when accepted.
  bool try_candidate(const dsl::Expr& e, lab::FactorLibrary& lib, SignalCache& signals,
                     MemoryStore& memory, std::size_t row, DateRange window);

  const PricePanel* panel_;
  MinerConfig cfg_;
  CandidateGenerator gen_;
};

}  // namespace alphaloop::agents
