#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alphaloop {

enum class ErrorCode {
  // panel
  MalformedCsv,
  OhlcViolation,
  EmptyUniverse,
  HorizonTooLarge,
  DateOutOfRange,
  // dsl
  SyntaxError,
  UnknownFunction,
  UnknownField,
  ArityError,
  BadWindow,
  EmptyCrossSection,
  TooFewFactors,
  EmptyReference,
  // lab
  NoValidDays,
  DuplicateFactorId,
  CorruptRecord,
  // exchange
  ShortNotAllowed,
  LotViolation,
  InsufficientAvailableShares,
  InsufficientCash,
  InsufficientMargin,
  MissingPrice,
  NonPositiveNav,
  // strategy
  EmptyEnsemble,
  UniverseTooSmall,
  InvalidTheta,
  // agents
  InsufficientHistory,
  GeneratorExhausted,
  // metrics
  CurveTooShort,
  ZeroVolatility,
  // analysis
  EmptyCandidateSet,
  LengthMismatch,
  MissingNav,
  // plumbing
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure the engine raises carries one of the codes above so callers
/// (and the CLI's exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace alphaloop
