#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/date.hpp"
#include "json.hpp"

namespace alphaloop::agents {

enum class Meta {
  Effective,
  Ineffective,
  Deprecated,
  Improved,
  Rejected,
  Executed,
  InsufficientFactors,
  EmptyEnsembleSkipped,
};

std::string_view to_string(Meta m);
std::optional<Meta> parse_meta(std::string_view s);

struct Event {
  Date day;
  std::string agent;  // miner, screener, trader
  std::string kind;
  std::optional<Meta> meta;  // informational events carry none
  nlohmann::ordered_json payload;
};

/// One JSON object per line: {"day","agent","kind","meta","payload"}.
std::string to_json_line(const Event& e);
Event event_from_json(std::string_view line);

struct FactorStats {
  int validations = 0;
  int times_effective = 0;
  int times_selected = 0;
  double last_mean_ic = 0.0;
  bool deprecated = false;
};

/// Shared memory H. The full log is append-only and kept for the dump; agents
/// read a bounded recent window plus per-factor aggregates.
class MemoryStore {
 public:
  explicit MemoryStore(std::size_t recent_capacity = 500) : capacity_(recent_capacity) {}

  void append(Event e);

  const std::vector<Event>& log() const { return log_; }
  const std::deque<std::size_t>& recent() const { return recent_; }
  const Event& at(std::size_t i) const { return log_[i]; }
  std::size_t size() const { return log_.size(); }

  const std::map<std::string, FactorStats>& factor_stats() const { return stats_; }
  /// Last day the miner validated a candidate with this canonical form.
  std::optional<Date> last_tried(const std::string& canonical) const;

  std::size_t count(std::string_view agent, std::optional<Meta> meta) const;
  std::string dump() const;

 private:
  void summarize(const Event& e);

  std::size_t capacity_;
  std::vector<Event> log_;
  std::deque<std::size_t> recent_;
  std::map<std::string, FactorStats> stats_;
  std::map<std::string, Date> tried_;
};

}  // namespace alphaloop::agents
