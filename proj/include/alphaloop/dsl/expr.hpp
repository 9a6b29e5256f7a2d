#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/panel/panel.hpp"

namespace alphaloop::dsl {

enum class Op {
  Field,
  Number,
  Placeholder,  // a literal erased by canonicalize
  Abs,
  Log,
  Sign,
  Neg,
  Add,
  Sub,
  Mul,
  Div,
  TsMean,
  TsStd,
  TsMin,
  TsMax,
  TsSum,
  TsRank,
  TsDelta,
  TsCorr,
  CsRank,
  CsZscore,
  CsWinsorize,
};

enum class OpKind { Leaf, Unary, Binary, TimeSeries, CrossSection };

struct OpInfo {
  Op op;
  std::string_view name;
  OpKind kind;
  int arity;  // including window / parameter literals
};

/// Function table used by the parser and printer. Leaves are not listed.
const std::vector<OpInfo>& functions();
const OpInfo* find_function(std::string_view name);
std::string_view op_name(Op op);
OpKind op_kind(Op op);

class Expr;

struct Node {
  Op op = Op::Number;
  Field field = Field::Close;
  double number = 0.0;
  std::vector<Expr> args;
};

/// Immutable expression tree; copies share structure.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  static Expr field(Field f);
  static Expr number(double v);
  static Expr placeholder();
  /// No validation; see parse() for checked construction.
  static Expr call(Op op, std::vector<Expr> args);

  explicit operator bool() const { return node_ != nullptr; }
  const Node& node() const { return *node_; }
  Op op() const { return node_->op; }
  const std::vector<Expr>& args() const { return node_->args; }

  std::size_t size() const;
  std::size_t depth() const;
  /// Window literal of a ts_* node (its last argument).
  int window() const;
  /// Fields referenced anywhere in the tree.
  std::vector<Field> fields() const;

 private:
  std::shared_ptr<const Node> node_;
};

bool operator==(const Expr& a, const Expr& b);

/// Compact prefix form, e.g. `cs_rank(ts_delta(close,5))`. Parses back to an
/// equal tree.
std::string print(const Expr& e);

/// Replaces every literal with a placeholder printed as `#`.
Expr canonicalize(const Expr& e);

}  // namespace alphaloop::dsl
