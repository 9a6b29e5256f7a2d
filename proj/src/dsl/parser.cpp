#include "alphaloop/dsl/parser.hpp"

#include <cctype>
#include <cmath>

#include "alphaloop/core/io.hpp"

namespace alphaloop::dsl {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : " or ") + s;
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Expr parse_all() {
    skip_ws();
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < text_.size()) syntax({"end of input"});
    return e;
  }

 private:
  [[noreturn]] void syntax(std::vector<std::string> expected) {
    std::string found = pos_ < text_.size() ? "'" + std::string(1, text_[pos_]) + "'"
                                            : std::string("end of input");
    throw ParseError(ErrorCode::SyntaxError,
                     "at position " + std::to_string(pos_) + ": expected " + join(expected) +
                         ", found " + found,
                     pos_, std::move(expected));
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  static bool ident_start(char c) { return (c >= 'a' && c <= 'z') || c == '_'; }
  static bool ident_char(char c) { return ident_start(c) || (c >= '0' && c <= '9'); }

  static bool number_start(char c) {
    return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
  }

  Expr parse_expr() {
    skip_ws();
    if (pos_ >= text_.size()) syntax({"identifier", "number"});
    const char c = text_[pos_];
    if (ident_start(c)) return parse_ident();
    if (number_start(c)) return parse_number();
    syntax({"identifier", "number"});
  }

  Expr parse_number() {
    const std::size_t start = pos_;
    if (text_[pos_] == '-' || text_[pos_] == '+') ++pos_;
    while (pos_ < text_.size() &&
           (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.' ||
            text_[pos_] == 'e' || text_[pos_] == 'E' ||
            ((text_[pos_] == '-' || text_[pos_] == '+') &&
             (text_[pos_ - 1] == 'e' || text_[pos_ - 1] == 'E')))) {
      ++pos_;
    }
    std::string_view token = text_.substr(start, pos_ - start);
    if (!token.empty() && token.front() == '+') token.remove_prefix(1);
    const auto v = io::parse_double(token);
    if (!v || !std::isfinite(*v)) {
      pos_ = start;
      syntax({"number"});
    }
    return Expr::number(*v);
  }

  Expr parse_ident() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
    const std::string name(text_.substr(start, pos_ - start));
    skip_ws();
    const bool is_call = pos_ < text_.size() && text_[pos_] == '(';
    if (!is_call) {
      const auto f = parse_field(name);
      if (!f) {
        throw ParseError(ErrorCode::UnknownField, "unknown field '" + name + "'", start);
      }
      return Expr::field(*f);
    }
    const OpInfo* info = find_function(name);
    if (!info) {
      throw ParseError(ErrorCode::UnknownFunction, "unknown function '" + name + "'", start);
    }
    ++pos_;  // '('
    std::vector<Expr> args;
    std::vector<std::size_t> arg_pos;
    skip_ws();
    arg_pos.push_back(pos_);
    args.push_back(parse_expr());
    skip_ws();
    while (pos_ < text_.size() && text_[pos_] == ',') {
      ++pos_;
      skip_ws();
      arg_pos.push_back(pos_);
      args.push_back(parse_expr());
      skip_ws();
    }
    if (pos_ >= text_.size() || text_[pos_] != ')') syntax({"','", "')'"});
    ++pos_;
    if (static_cast<int>(args.size()) != info->arity) {
      throw ParseError(ErrorCode::ArityError,
                       name + " takes " + std::to_string(info->arity) + " argument(s), got " +
                           std::to_string(args.size()),
                       start);
    }
    check_literals(*info, args, arg_pos);
    return Expr::call(info->op, std::move(args));
  }

  void check_literals(const OpInfo& info, const std::vector<Expr>& args,
                      const std::vector<std::size_t>& arg_pos) {
    if (info.kind == OpKind::TimeSeries) {
      const Expr& w = args.back();
      const bool ok = w.op() == Op::Number && w.node().number >= 2 &&
                      w.node().number == std::floor(w.node().number) &&
                      w.node().number <= 100000;
      if (!ok) {
        throw ParseError(ErrorCode::BadWindow,
                         std::string(info.name) + " window must be an integer literal >= 2",
                         arg_pos.back());
      }
    }
    if (info.op == Op::CsWinsorize) {
      const Expr& p = args.back();
      const bool ok = p.op() == Op::Number && p.node().number > 0 && p.node().number < 0.5;
      if (!ok) {
        throw ParseError(ErrorCode::BadWindow,
                         "cs_winsorize p must be a literal in (0, 0.5)", arg_pos.back());
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseError::ParseError(ErrorCode code, const std::string& message, std::size_t position,
                       std::vector<std::string> expected)
    : Error(code, message), position_(position), expected_(std::move(expected)) {}

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

}  // namespace alphaloop::dsl
