#include "alphaloop/agents/miner.hpp"

#include <algorithm>
#include <cmath>
#include <spdlog/spdlog.h>

#include "alphaloop/core/error.hpp"
#include "alphaloop/dsl/parser.hpp"

namespace alphaloop::agents {

namespace {

nlohmann::ordered_json num(double v) {
  return std::isfinite(v) ? nlohmann::ordered_json(v) : nlohmann::ordered_json(nullptr);
}

bool contains_op(const dsl::Expr& e, dsl::Op op) {
  if (e.op() == op) return true;
  return std::any_of(e.args().begin(), e.args().end(),
                     [&](const dsl::Expr& a) { return contains_op(a, op); });
}

bool has_negated_delta(const dsl::Expr& e) {
  if (e.op() == dsl::Op::Neg && contains_op(e.args()[0], dsl::Op::TsDelta)) return true;
  return std::any_of(e.args().begin(), e.args().end(), has_negated_delta);
}

const dsl::OpInfo& require_function(std::string_view name, dsl::OpKind kind, int arity) {
  const dsl::OpInfo* info = dsl::find_function(name);
  if (!info || info->kind != kind || info->arity != arity) {
    throw Error(ErrorCode::ConfigError, "miner template cannot use '" + std::string(name) + "'");
  }
  return *info;
}


Date parse_day(const std::string& s) {
  const auto d = Date::parse(s);
  if (!d) throw Error(ErrorCode::CorruptRecord, "library snapshot: bad day '" + s + "'");
  return *d;
}

}  // namespace

lab::Category classify(const dsl::Expr& e) {
  const auto fields = e.fields();
  const auto uses = [&](Field f) { return std::find(fields.begin(), fields.end(), f) != fields.end(); };
  if (std::any_of(fields.begin(), fields.end(), is_fundamental)) return lab::Category::Value;
  if (uses(Field::Volume)) return lab::Category::Liquidity;
  if (contains_op(e, dsl::Op::TsStd) || contains_op(e, dsl::Op::TsMax) ||
      contains_op(e, dsl::Op::TsMin) || uses(Field::High) || uses(Field::Low)) {
    return lab::Category::Volatility;
  }
  if (has_negated_delta(e)) return lab::Category::Reversal;
  return lab::Category::Momentum;
}

CandidateGenerator::CandidateGenerator(const PricePanel& panel, const MinerConfig& cfg,
                                       std::uint64_t seed) {
  std::vector<Field> fields;
  if (cfg.fields.empty()) {
    fields = {Field::Open, Field::High, Field::Low, Field::Close, Field::Volume};
    for (Field f : {Field::Pe, Field::Ps, Field::Pb, Field::Dyr})
      if (panel.has_field(f)) fields.push_back(f);
  } else {
    for (const auto& name : cfg.fields) {
      const auto f = parse_field(name);
      if (!f) throw Error(ErrorCode::ConfigError, "miner field '" + name + "' is unknown");
      fields.push_back(*f);
    }
  }
  for (const auto& t : cfg.transforms) {
    if (t != "id" && t != "neg") require_function(t, dsl::OpKind::CrossSection, 1);
  }
  for (const auto& t : cfg.transforms) {
    for (const auto& op_name : cfg.ops) {
      const auto& op = require_function(op_name, dsl::OpKind::TimeSeries, 2);
      for (Field f : fields) {
        for (int w : cfg.windows) {
          if (w < 2) throw Error(ErrorCode::ConfigError, "miner windows must be at least 2");
          dsl::Expr inner = dsl::Expr::call(
              op.op, {dsl::Expr::field(f), dsl::Expr::number(static_cast<double>(w))});
          if (t == "id") {
            pool_.push_back(inner);
          } else if (t == "neg") {
            pool_.push_back(dsl::Expr::call(dsl::Op::Neg, {inner}));
          } else {
            pool_.push_back(dsl::Expr::call(dsl::find_function(t)->op, {inner}));
          }
        }
      }
    }
  }
  std::mt19937_64 rng(seed);
  std::shuffle(pool_.begin(), pool_.end(), rng);
}

LibrarySnapshot snapshot_of(const lab::FactorLibrary& lib, Date day) {
  LibrarySnapshot s;
  s.day = day;
  for (const auto* r : lib.with_status(lab::Status::Effective)) {
    s.effective.emplace_back(r->factor_id, r->expression);
  }
  return s;
}

std::string to_json_line(const LibrarySnapshot& s) {
  nlohmann::ordered_json j;
  j["day"] = s.day.to_string();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [id, expr] : s.effective) arr.push_back({{"factor_id", id}, {"expression", expr}});
  j["effective"] = arr;
  return j.dump();
}

LibrarySnapshot snapshot_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    LibrarySnapshot s;
    s.day = parse_day(j.at("day").get<std::string>());
    for (const auto& e : j.at("effective")) {
      s.effective.emplace_back(e.at("factor_id").get<std::string>(),
                               e.at("expression").get<std::string>());
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::CorruptRecord, std::string("library snapshot: ") + e.what());
  }
}

Miner::Miner(const PricePanel& panel, MinerConfig cfg, std::uint64_t seed)
    : panel_(&panel), cfg_(std::move(cfg)), gen_(panel, cfg_, seed) {}

std::size_t Miner::window_start(std::size_t row) const {
  const auto w = static_cast<std::size_t>(std::max(cfg_.window, 2));
  return row + 1 >= w ? row + 1 - w : 0;
}

bool Miner::recently_tried(const MemoryStore& memory, const std::string& canonical,
                           std::size_t row) const {
  const auto last = memory.last_tried(canonical);
  if (!last) return false;
  const auto at = panel_->calendar().last_at_or_before(*last);
  if (!at) return false;
  return row < *at + static_cast<std::size_t>(std::max(cfg_.revisit, 0));
}

bool Miner::try_candidate(const dsl::Expr& e, lab::FactorLibrary& lib, SignalCache& signals,
                          MemoryStore& memory, std::size_t row, DateRange window) {
  const std::string id = lab::factor_id_for(e);
  Event ev;
  ev.day = panel_->calendar()[row];
  ev.agent = "miner";
  ev.kind = "validation";
  ev.payload["factor_id"] = id;
  ev.payload["expression"] = dsl::print(e);
  ev.payload["canonical"] = dsl::print(dsl::canonicalize(e));
  bool accepted = false;
  try {
    const Matrix& sig = signals.get(id, e);
    lab::ValidationReport rep = lab::validate_signal(sig, *panel_, window, cfg_.validation);
    rep.factor_id = id;
    accepted = lab::accept(rep, cfg_.acceptance);
    ev.payload["mean_ic"] = num(rep.mean_ic);
    ev.payload["icir"] = num(rep.icir);
    ev.payload["turnover"] = num(rep.turnover);
    ev.payload["coverage"] = num(rep.coverage);
    if (accepted) {
      lab::FactorRecord rec;
      rec.factor_id = id;
      rec.expression = dsl::print(e);
      rec.category = classify(e);
      rec.status = lab::Status::Effective;
      rec.history.push_back(rep);
      ev.payload["category"] = std::string(lab::to_string(rec.category));
      lib.add(std::move(rec));
    }
  } catch (const Error& err) {
    ev.payload["error"] = err.what();
  }
  ev.meta = accepted ? Meta::Effective : Meta::Ineffective;
  memory.append(std::move(ev));
  return accepted;
}

void Miner::generate(lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                     std::size_t row, DateRange window, PolicyBackend* policy,
                     MinerCycleResult& out) {
  const auto eligible = [&](const dsl::Expr& e) {
    return lib.find(lab::factor_id_for(e)) == nullptr &&
           !recently_tried(memory, dsl::print(dsl::canonicalize(e)), row);
  };
  const auto run = [&](const dsl::Expr& e) {
    ++out.validated;
    if (try_candidate(e, lib, signals, memory, row, window)) out.accepted.push_back(lab::factor_id_for(e));
  };
  const auto room = [&] {
    return out.validated < cfg_.budget && static_cast<int>(out.accepted.size()) < cfg_.max_new;
  };

  if (policy && policy->kind() == PolicyKind::External && room()) {
    nlohmann::json inputs;
    inputs["day"] = panel_->calendar()[row].to_string();
    inputs["budget"] = cfg_.budget;
    inputs["max_new"] = cfg_.max_new;
    inputs["effective"] = nlohmann::json::array();
    for (const auto* r : lib.with_status(lab::Status::Effective)) inputs["effective"].push_back(r->expression);
    const auto reply = policy->query("miner", inputs);
    if (reply && reply->contains("expressions") && (*reply)["expressions"].is_array()) {
      for (const auto& item : (*reply)["expressions"]) {
        if (!room()) break;
        if (!item.is_string()) continue;
        try {
          const dsl::Expr e = dsl::parse(item.get<std::string>());
          if (eligible(e)) run(e);
        } catch (const Error& err) {
          spdlog::warn("external miner expression rejected: {}", err.what());
        }
      }
      if (out.validated > 0) return;
    }
    if (reply) spdlog::warn("external miner response unusable, using the template generator");
  }

  while (room()) {
    const auto e = gen_.next(eligible);
    if (!e) {
      out.exhausted = true;
      spdlog::info("{}: template generator exhausted after {} candidates",
                   to_string(ErrorCode::GeneratorExhausted), out.validated);
      break;
    }
    run(*e);
  }
}

void Miner::maintain(lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                     std::size_t row, DateRange window, MinerCycleResult& out) {
  const auto& cal = panel_->calendar();
  std::vector<std::string> due;
  for (const auto* r : lib.with_status(lab::Status::Effective)) {
    if (std::find(out.accepted.begin(), out.accepted.end(), r->factor_id) != out.accepted.end()) continue;
    const auto last = r->history.empty() ? std::nullopt
                                         : cal.last_at_or_before(r->history.back().validated_on);
    if (!last || row >= *last + static_cast<std::size_t>(cfg_.cadence)) due.push_back(r->factor_id);
  }
  for (const auto& id : due) {
    lab::FactorRecord* rec = lib.find(id);
    lab::ValidationReport fresh;
    fresh.factor_id = id;
    fresh.window = window;
    fresh.validated_on = window.end;
    fresh.mean_ic = kMissing;
    std::string error;
    try {
      const dsl::Expr e = dsl::parse(rec->expression);
      fresh = lab::validate_signal(signals.get(id, e), *panel_, window, cfg_.validation);
      fresh.factor_id = id;
    } catch (const Error& err) {
      error = err.what();
    }
    const lab::Status next = lab::retain(*rec, fresh);
    rec->history.push_back(fresh);
    rec->status = next;
    Event ev;
    ev.day = cal[row];
    ev.agent = "miner";
    ev.kind = "maintenance";
    ev.meta = next == lab::Status::Deprecated ? Meta::Deprecated : Meta::Effective;
    ev.payload["factor_id"] = id;
    ev.payload["expression"] = rec->expression;
    ev.payload["mean_ic"] = num(fresh.mean_ic);
    ev.payload["original_mean_ic"] = num(rec->history.front().mean_ic);
    if (!error.empty()) ev.payload["error"] = error;
    memory.append(std::move(ev));
    (next == lab::Status::Deprecated ? out.deprecated : out.maintained).push_back(id);
  }
}

MinerCycleResult Miner::cycle(lab::FactorLibrary& lib, SignalCache& signals, MemoryStore& memory,
                              std::size_t row, std::size_t window_first, PolicyBackend* policy) {
  MinerCycleResult out;
  if (row >= panel_->num_days() || window_first > row) {
    throw Error(ErrorCode::DateOutOfRange, "miner window outside the panel");
  }
  const DateRange window{panel_->calendar()[window_first], panel_->calendar()[row]};
  generate(lib, signals, memory, row, window, policy, out);
  maintain(lib, signals, memory, row, window, out);
  return out;
}

}  // namespace alphaloop::agents
