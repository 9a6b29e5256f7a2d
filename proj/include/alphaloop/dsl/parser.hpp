#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "alphaloop/core/error.hpp"
#include "alphaloop/dsl/expr.hpp"

namespace alphaloop::dsl {

/// Error raised by parse(); `position` is a 0-based byte offset.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, const std::string& message, std::size_t position,
             std::vector<std::string> expected = {});

  std::size_t position() const noexcept { return position_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::vector<std::string> expected_;
};

/// Grammar: expr := ident | number | func '(' expr {',' expr} ')'.
/// Throws ParseError with SyntaxError, UnknownFunction, UnknownField,
/// ArityError or BadWindow.
Expr parse(std::string_view text);

}  // namespace alphaloop::dsl
