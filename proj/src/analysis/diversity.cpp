#include "alphaloop/analysis/analysis.hpp"
#include "alphaloop/core/error.hpp"
#include "alphaloop/dsl/diversity.hpp"
#include "json.hpp"

namespace alphaloop::analysis {

DiversityReport diversity_report(const std::vector<std::vector<dsl::Expr>>& snapshots,
                                 const std::vector<dsl::Expr>& reference) {
  DiversityReport r;
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (const auto& lib : snapshots) {
    DiversityTrial t;
    try {
      t.phi_intra = dsl::phi_intra(lib);
      intra += *t.phi_intra;
      ++n_intra;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewFactors) throw;
      t.note = "too_few_factors";
    }
    try {
      t.phi_inter = dsl::phi_inter(lib, reference);
      inter += *t.phi_inter;
      ++n_inter;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::EmptyReference) throw;
      t.note = t.note.empty() ? "empty" : t.note + ",empty";
    }
    r.trials.push_back(std::move(t));
  }
  if (n_intra) r.mean_intra = intra / static_cast<double>(n_intra);
  if (n_inter) r.mean_inter = inter / static_cast<double>(n_inter);
  return r;
}

std::string diversity_json(const DiversityReport& r) {
  using nlohmann::ordered_json;
  const auto opt = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  ordered_json trials = ordered_json::array();
  for (const auto& t : r.trials) {
    ordered_json j;
    j["phi_intra"] = opt(t.phi_intra);
    j["phi_inter"] = opt(t.phi_inter);
    if (!t.note.empty()) j["note"] = t.note;
    trials.push_back(std::move(j));
  }
  ordered_json out;
  out["trials"] = trials;
  out["mean_phi_intra"] = opt(r.mean_intra);
  out["mean_phi_inter"] = opt(r.mean_inter);
  return out.dump(2) + "\n";
}

}  // namespace alphaloop::analysis
