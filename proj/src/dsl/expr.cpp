#include "alphaloop/dsl/expr.hpp"

#include <algorithm>
#include <cmath>

#include "alphaloop/core/io.hpp"

namespace alphaloop::dsl {

const std::vector<OpInfo>& functions() {
  static const std::vector<OpInfo> table = {
      {Op::Abs, "abs", OpKind::Unary, 1},
      {Op::Log, "log", OpKind::Unary, 1},
      {Op::Sign, "sign", OpKind::Unary, 1},
      {Op::Neg, "neg", OpKind::Unary, 1},
      {Op::Add, "add", OpKind::Binary, 2},
      {Op::Sub, "sub", OpKind::Binary, 2},
      {Op::Mul, "mul", OpKind::Binary, 2},
      {Op::Div, "div", OpKind::Binary, 2},
      {Op::TsMean, "ts_mean", OpKind::TimeSeries, 2},
      {Op::TsStd, "ts_std", OpKind::TimeSeries, 2},
      {Op::TsMin, "ts_min", OpKind::TimeSeries, 2},
      {Op::TsMax, "ts_max", OpKind::TimeSeries, 2},
      {Op::TsSum, "ts_sum", OpKind::TimeSeries, 2},
      {Op::TsRank, "ts_rank", OpKind::TimeSeries, 2},
      {Op::TsDelta, "ts_delta", OpKind::TimeSeries, 2},
      {Op::TsCorr, "ts_corr", OpKind::TimeSeries, 3},
      {Op::CsRank, "cs_rank", OpKind::CrossSection, 1},
      {Op::CsZscore, "cs_zscore", OpKind::CrossSection, 1},
      {Op::CsWinsorize, "cs_winsorize", OpKind::CrossSection, 2},
  };
  return table;
}

const OpInfo* find_function(std::string_view name) {
  for (const auto& info : functions()) {
    if (info.name == name) return &info;
  }
  return nullptr;
}

std::string_view op_name(Op op) {
  switch (op) {
    case Op::Field: return "field";
    case Op::Number: return "number";
    case Op::Placeholder: return "#";
    default: break;
  }
  for (const auto& info : functions()) {
    if (info.op == op) return info.name;
  }
  return "?";
}

OpKind op_kind(Op op) {
  for (const auto& info : functions()) {
    if (info.op == op) return info.kind;
  }
  return OpKind::Leaf;
}

Expr Expr::field(Field f) {
  auto n = std::make_shared<Node>();
  n->op = Op::Field;
  n->field = f;
  return Expr(std::move(n));
}

Expr Expr::number(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Number;
  n->number = v;
  return Expr(std::move(n));
}

Expr Expr::placeholder() {
  auto n = std::make_shared<Node>();
  n->op = Op::Placeholder;
  return Expr(std::move(n));
}

Expr Expr::call(Op op, std::vector<Expr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return Expr(std::move(n));
}

std::size_t Expr::size() const {
  std::size_t n = 1;
  for (const auto& a : args()) n += a.size();
  return n;
}

std::size_t Expr::depth() const {
  std::size_t d = 0;
  for (const auto& a : args()) d = std::max(d, a.depth());
  return d + 1;
}

int Expr::window() const {
  const auto& last = args().back().node();
  return static_cast<int>(last.number);
}

std::vector<Field> Expr::fields() const {
  std::vector<Field> out;
  if (op() == Op::Field) out.push_back(node().field);
  for (const auto& a : args()) {
    for (Field f : a.fields()) {
      if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
  }
  return out;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.op() != b.op()) return false;
  if (a.op() == Op::Field && a.node().field != b.node().field) return false;
  if (a.op() == Op::Number && a.node().number != b.node().number) return false;
  if (a.args().size() != b.args().size()) return false;
  for (std::size_t i = 0; i < a.args().size(); ++i) {
    if (!(a.args()[i] == b.args()[i])) return false;
  }
  return true;
}

namespace {

void print_to(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Field:
      out += field_name(e.node().field);
      return;
    case Op::Number:
      out += io::format_double(e.node().number);
      return;
    case Op::Placeholder:
      out += '#';
      return;
    default:
      break;
  }
  out += op_name(e.op());
  out += '(';
  for (std::size_t i = 0; i < e.args().size(); ++i) {
    if (i > 0) out += ',';
    print_to(e.args()[i], out);
  }
  out += ')';
}

}  // namespace

std::string print(const Expr& e) {
  std::string out;
  print_to(e, out);
  return out;
}

Expr canonicalize(const Expr& e) {
  if (e.op() == Op::Number) return Expr::placeholder();
  if (e.args().empty()) return e;
  std::vector<Expr> args;
  args.reserve(e.args().size());
  for (const auto& a : e.args()) args.push_back(canonicalize(a));
  return Expr::call(e.op(), std::move(args));
}

}  // namespace alphaloop::dsl
