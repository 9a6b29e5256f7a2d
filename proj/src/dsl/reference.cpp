#include "alphaloop/dsl/reference.hpp"

#include <sstream>

#include "alphaloop/core/error.hpp"
#include "alphaloop/core/io.hpp"
#include "alphaloop/dsl/parser.hpp"

namespace alphaloop::dsl {

namespace {

constexpr const char* kBuiltin = R"(# momentum
ts_delta(close,5)
ts_delta(close,20)
cs_rank(ts_delta(close,10))
div(close,ts_mean(close,20))
# reversal
neg(ts_delta(close,2))
neg(cs_rank(ts_delta(close,5)))
sub(ts_mean(close,5),close)
neg(ts_rank(close,10))
# volatility
ts_std(close,20)
neg(ts_std(div(close,ts_mean(close,5)),20))
div(sub(high,low),close)
ts_mean(div(sub(high,low),close),10)
# liquidity
ts_mean(volume,20)
div(volume,ts_mean(volume,20))
ts_corr(close,volume,10)
neg(ts_corr(cs_rank(close),cs_rank(volume),20))
ts_std(volume,10)
# value
div(1,pe)
div(1,pb)
neg(ps)
)";

std::vector<ReferenceFactor> parse_reference(const std::string& text, const std::string& origin) {
  std::vector<ReferenceFactor> out;
  std::istringstream in(text);
  std::string line;
  std::string category = "uncategorized";
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view s = io::trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      category = std::string(io::trim(s.substr(1)));
      continue;
    }
    try {
      out.push_back({category, parse(s)});
    } catch (const Error& e) {
      throw Error(e.code(), origin + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyReference, origin + " has no expressions");
  return out;
}

}  // namespace

const std::vector<ReferenceFactor>& classical_reference() {
  static const std::vector<ReferenceFactor> refs = parse_reference(kBuiltin, "built-in reference");
  return refs;
}

std::vector<ReferenceFactor> load_reference(const std::filesystem::path& path) {
  return parse_reference(io::read_file(path), path.filename().string());
}

std::vector<Expr> expressions(const std::vector<ReferenceFactor>& refs) {
  std::vector<Expr> out;
  out.reserve(refs.size());
  for (const auto& r : refs) out.push_back(r.expr);
  return out;
}

}  // namespace alphaloop::dsl
