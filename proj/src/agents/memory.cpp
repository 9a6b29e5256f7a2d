#include "alphaloop/agents/memory.hpp"

#include <array>

#include "alphaloop/core/error.hpp"

namespace alphaloop::agents {

namespace {

constexpr std::array<std::pair<Meta, std::string_view>, 8> kMetaNames = {{
    {Meta::Effective, "effective"},
    {Meta::Ineffective, "ineffective"},
    {Meta::Deprecated, "deprecated"},
    {Meta::Improved, "improved"},
    {Meta::Rejected, "rejected"},
    {Meta::Executed, "executed"},
    {Meta::InsufficientFactors, "insufficient_factors"},
    {Meta::EmptyEnsembleSkipped, "empty_ensemble_skipped"},
}};


Date parse_day(const std::string& s) {
  const auto d = Date::parse(s);
  if (!d) throw Error(ErrorCode::CorruptRecord, "memory event: bad day '" + s + "'");
  return *d;
}

}  // namespace

std::string_view to_string(Meta m) {
  for (const auto& [k, v] : kMetaNames)
    if (k == m) return v;
  return "?";
}

std::optional<Meta> parse_meta(std::string_view s) {
  for (const auto& [k, v] : kMetaNames)
    if (v == s) return k;
  return std::nullopt;
}

std::string to_json_line(const Event& e) {
  nlohmann::ordered_json j;
  j["day"] = e.day.to_string();
  j["agent"] = e.agent;
  j["kind"] = e.kind;
  j["meta"] = e.meta ? nlohmann::ordered_json(std::string(to_string(*e.meta)))
                     : nlohmann::ordered_json(nullptr);
  j["payload"] = e.payload;
  return j.dump();
}

Event event_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::ordered_json::parse(line);
    Event e;
    e.day = parse_day(j.at("day").get<std::string>());
    e.agent = j.at("agent").get<std::string>();
    e.kind = j.at("kind").get<std::string>();
    if (!j.at("meta").is_null()) {
      e.meta = parse_meta(j.at("meta").get<std::string>());
      if (!e.meta) throw Error(ErrorCode::CorruptRecord, "unknown meta tag");
    }
    e.payload = j.at("payload");
    return e;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::CorruptRecord, std::string("memory event: ") + ex.what());
  }
}

void MemoryStore::append(Event e) {
  summarize(e);
  log_.push_back(std::move(e));
  recent_.push_back(log_.size() - 1);
  while (recent_.size() > capacity_) recent_.pop_front();
}

void MemoryStore::summarize(const Event& e) {
  const auto& p = e.payload;
  if (e.agent == "miner" && p.contains("canonical")) {
    tried_[p["canonical"].get<std::string>()] = e.day;
  }
  if (e.agent == "miner" && p.contains("factor_id")) {
    auto& s = stats_[p["factor_id"].get<std::string>()];
    ++s.validations;
    if (p.contains("mean_ic") && p["mean_ic"].is_number()) s.last_mean_ic = p["mean_ic"].get<double>();
    if (e.meta == Meta::Effective) ++s.times_effective;
    if (e.meta == Meta::Deprecated) s.deprecated = true;
  }
  if (e.agent == "screener" && e.kind == "ensemble" && p.contains("entries")) {
    for (const auto& entry : p["entries"]) ++stats_[entry["factor_id"].get<std::string>()].times_selected;
  }
}

std::optional<Date> MemoryStore::last_tried(const std::string& canonical) const {
  const auto it = tried_.find(canonical);
  if (it == tried_.end()) return std::nullopt;
  return it->second;
}

std::size_t MemoryStore::count(std::string_view agent, std::optional<Meta> meta) const {
  std::size_t n = 0;
  for (const auto& e : log_)
    if (e.agent == agent && e.meta == meta) ++n;
  return n;
}

std::string MemoryStore::dump() const {
  std::string out;
  for (const auto& e : log_) {
    out += to_json_line(e);
    out += '\n';
  }
  return out;
}

}  // namespace alphaloop::agents
