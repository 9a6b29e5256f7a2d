#include "alphaloop/lab/library.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "json.hpp"

namespace alphaloop::lab {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr std::pair<Category, std::string_view> kCategories[] = {
    {Category::Momentum, "momentum"},     {Category::Reversal, "reversal"},
    {Category::Value, "value"},           {Category::Quality, "quality"},
    {Category::Volatility, "volatility"}, {Category::Liquidity, "liquidity"},
    {Category::Other, "other"},
};

constexpr std::pair<Status, std::string_view> kStatuses[] = {
    {Status::Candidate, "candidate"},
    {Status::Effective, "effective"},
    {Status::Ineffective, "ineffective"},
    {Status::Deprecated, "deprecated"},
};

std::mutex& library_write_mutex() {
  static std::mutex m;
  return m;
}

json number(double v) { return is_missing(v) ? json(nullptr) : json(v); }

double number_from(const json& j) { return j.is_null() ? kMissing : j.get<double>(); }

json report_json(const ValidationReport& r) {
  json decay = json::array();
  for (const auto& [h, ic] : r.decay) decay.push_back(json::array({h, number(ic)}));
  return json{{"window_start", r.window.start.to_string()},
              {"window_end", r.window.end.to_string()},
              {"mean_ic", number(r.mean_ic)},
              {"ic_std", number(r.ic_std)},
              {"icir", number(r.icir)},
              {"ic_hit_ratio", number(r.ic_hit_ratio)},
              {"turnover", number(r.turnover)},
              {"coverage", number(r.coverage)},
              {"decay", decay},
              {"validated_on", r.validated_on.to_string()}};
}

Date date_from(const json& j, const char* key, const std::string& origin) {
  const auto d = Date::parse(j.at(key).get<std::string>());
  if (!d) throw Error(ErrorCode::CorruptRecord, origin + ": bad date in '" + key + "'");
  return *d;
}

ValidationReport report_from(const json& j, const std::string& factor_id,
                             const std::string& origin) {
  ValidationReport r;
  r.factor_id = factor_id;
  r.window = {date_from(j, "window_start", origin), date_from(j, "window_end", origin)};
  r.mean_ic = number_from(j.at("mean_ic"));
  r.ic_std = number_from(j.at("ic_std"));
  r.icir = number_from(j.at("icir"));
  r.ic_hit_ratio = number_from(j.at("ic_hit_ratio"));
  r.turnover = number_from(j.at("turnover"));
  r.coverage = number_from(j.at("coverage"));
  for (const json& pair : j.at("decay")) {
    if (!pair.is_array() || pair.size() != 2) {
      throw Error(ErrorCode::CorruptRecord, origin + ": decay entries must be [h, ic]");
    }
    r.decay.emplace_back(pair[0].get<int>(), number_from(pair[1]));
  }
  r.validated_on = date_from(j, "validated_on", origin);
  return r;
}

bool same_number(double a, double b) { return (is_missing(a) && is_missing(b)) || a == b; }

bool same_report(const ValidationReport& a, const ValidationReport& b) {
  if (a.window != b.window || a.validated_on != b.validated_on || a.decay.size() != b.decay.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.decay.size(); ++i) {
    if (a.decay[i].first != b.decay[i].first || !same_number(a.decay[i].second, b.decay[i].second)) {
      return false;
    }
  }
  return same_number(a.mean_ic, b.mean_ic) && same_number(a.ic_std, b.ic_std) &&
         same_number(a.icir, b.icir) && same_number(a.ic_hit_ratio, b.ic_hit_ratio) &&
         same_number(a.turnover, b.turnover) && same_number(a.coverage, b.coverage);
}

}  // namespace

std::string_view to_string(Category c) {
  for (const auto& [k, name] : kCategories) {
    if (k == c) return name;
  }
  return "other";
}

std::string_view to_string(Status s) {
  for (const auto& [k, name] : kStatuses) {
    if (k == s) return name;
  }
  return "candidate";
}

std::optional<Category> parse_category(std::string_view s) {
  for (const auto& [k, name] : kCategories) {
    if (name == s) return k;
  }
  return std::nullopt;
}

std::optional<Status> parse_status(std::string_view s) {
  for (const auto& [k, name] : kStatuses) {
    if (name == s) return k;
  }
  return std::nullopt;
}

bool valid_transition(Status from, Status to) {
  if (from == Status::Candidate) return to == Status::Effective || to == Status::Ineffective;
  return from == Status::Effective && to == Status::Deprecated;
}

std::string factor_id_for(const dsl::Expr& e) {
  return "f_" + io::hex64(io::fnv1a64(dsl::print(e)));
}

Status retain(const FactorRecord& record, const ValidationReport& fresh) {
  if (record.status != Status::Effective || record.history.empty()) return record.status;
  const double original = record.history.front().mean_ic;
  const bool same_sign = (original > 0.0 && fresh.mean_ic > 0.0) ||
                         (original < 0.0 && fresh.mean_ic < 0.0);
  if (same_sign && std::abs(fresh.mean_ic) >= 0.5 * std::abs(original)) return Status::Effective;
  return Status::Deprecated;
}

std::string to_json(const FactorRecord& r) {
  json history = json::array();
  for (const auto& h : r.history) history.push_back(report_json(h));
  const json j = {{"factor_id", r.factor_id},
                  {"expression", r.expression},
                  {"category", std::string(to_string(r.category))},
                  {"status", std::string(to_string(r.status))},
                  {"history", history}};
  return j.dump(2) + "\n";
}

FactorRecord from_json(std::string_view text, const std::string& origin) {
  FactorRecord r;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw Error(ErrorCode::CorruptRecord, origin + ": not a JSON object");
    for (const char* key : {"factor_id", "expression", "category", "status", "history"}) {
      if (!j.contains(key)) {
        throw Error(ErrorCode::CorruptRecord, origin + ": missing \"" + key + "\"");
      }
    }
    r.factor_id = j.at("factor_id").get<std::string>();
    r.expression = j.at("expression").get<std::string>();
    const auto cat = parse_category(j.at("category").get<std::string>());
    const auto st = parse_status(j.at("status").get<std::string>());
    if (!cat) throw Error(ErrorCode::CorruptRecord, origin + ": unknown category");
    if (!st) throw Error(ErrorCode::CorruptRecord, origin + ": unknown status");
    r.category = *cat;
    r.status = *st;
    for (const json& h : j.at("history")) r.history.push_back(report_from(h, r.factor_id, origin));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptRecord, origin + ": " + e.what());
  }
  return r;
}

void save_factor(const FactorRecord& r, const fs::path& dir) {
  std::lock_guard lock(library_write_mutex());
  fs::create_directories(dir);
  io::write_file_atomic(dir / (r.factor_id + ".json"), to_json(r));
}

std::vector<FactorRecord> load_library(const fs::path& dir) {
  std::vector<FactorRecord> out;
  if (!fs::exists(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, std::string> seen;
  for (const auto& f : files) {
    const std::string origin = f.filename().string();
    FactorRecord r = from_json(io::read_file(f), origin);
    if (const auto it = seen.find(r.factor_id); it != seen.end()) {
      throw Error(ErrorCode::DuplicateFactorId,
                  "factor id " + r.factor_id + " appears in " + it->second + " and " + origin);
    }
    seen.emplace(r.factor_id, origin);
    out.push_back(std::move(r));
  }
  return out;
}

bool same_record(const FactorRecord& a, const FactorRecord& b) {
  if (a.factor_id != b.factor_id || a.expression != b.expression || a.category != b.category ||
      a.status != b.status || a.history.size() != b.history.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    if (!same_report(a.history[i], b.history[i])) return false;
  }
  return true;
}

FactorLibrary::FactorLibrary(std::vector<FactorRecord> records) {
  for (auto& r : records) add(std::move(r));
}

const FactorRecord* FactorLibrary::find(std::string_view id) const {
  for (const auto& r : records_) {
    if (r.factor_id == id) return &r;
  }
  return nullptr;
}

FactorRecord* FactorLibrary::find(std::string_view id) {
  for (auto& r : records_) {
    if (r.factor_id == id) return &r;
  }
  return nullptr;
}

void FactorLibrary::add(FactorRecord r) {
  if (find(r.factor_id)) {
    throw Error(ErrorCode::DuplicateFactorId, "factor id " + r.factor_id + " already in library");
  }
  records_.push_back(std::move(r));
}

std::vector<const FactorRecord*> FactorLibrary::with_status(Status s) const {
  std::vector<const FactorRecord*> out;
  for (const auto& r : records_) {
    if (r.status == s) out.push_back(&r);
  }
  return out;
}

}  // namespace alphaloop::lab
