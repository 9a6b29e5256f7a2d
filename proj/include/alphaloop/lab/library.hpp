#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/dsl/expr.hpp"
#include "alphaloop/lab/validation.hpp"

namespace alphaloop::lab {

enum class Category { Momentum, Reversal, Value, Quality, Volatility, Liquidity, Other };
enum class Status { Candidate, Effective, Ineffective, Deprecated };

std::string_view to_string(Category c);
std::string_view to_string(Status s);
std::optional<Category> parse_category(std::string_view s);
std::optional<Status> parse_status(std::string_view s);

/// Allowed: candidate -> effective | ineffective, effective -> deprecated.
bool valid_transition(Status from, Status to);

struct FactorRecord {
  std::string factor_id;
  std::string expression;
  Category category = Category::Other;
  Status status = Status::Candidate;
  std::vector<ValidationReport> history;  // history[0] is the acceptance test
};

/// "f_" + FNV-1a 64 hex of the printed expression.
std::string factor_id_for(const dsl::Expr& e);

/// Keeps `effective` iff the fresh mean IC has the original sign and at least
/// half its magnitude; otherwise `deprecated`.
Status retain(const FactorRecord& record, const ValidationReport& fresh);

std::string to_json(const FactorRecord& r);
/// Throws CorruptRecord naming `origin`.
FactorRecord from_json(std::string_view text, const std::string& origin);

/// Writes `<dir>/<factor_id>.json` atomically.
void save_factor(const FactorRecord& r, const std::filesystem::path& dir);
/// Reads every `*.json` in dir sorted by file name; a missing dir is empty.
/// Throws DuplicateFactorId, CorruptRecord.
std::vector<FactorRecord> load_library(const std::filesystem::path& dir);

bool same_record(const FactorRecord& a, const FactorRecord& b);

/// In-memory library keyed by factor id.
class FactorLibrary {
 public:
  FactorLibrary() = default;
  explicit FactorLibrary(std::vector<FactorRecord> records);

  const std::vector<FactorRecord>& records() const { return records_; }
  const FactorRecord* find(std::string_view id) const;
  FactorRecord* find(std::string_view id);
  /// Throws DuplicateFactorId.
  void add(FactorRecord r);
  std::vector<const FactorRecord*> with_status(Status s) const;
  std::size_t size() const { return records_.size(); }

 private:
  std::vector<FactorRecord> records_;
};

}  // namespace alphaloop::lab
