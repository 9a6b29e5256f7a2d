#include "alphaloop/core/error.hpp"

namespace alphaloop {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedCsv: return "MalformedCsv";
    case ErrorCode::OhlcViolation: return "OhlcViolation";
    case ErrorCode::EmptyUniverse: return "EmptyUniverse";
    case ErrorCode::HorizonTooLarge: return "HorizonTooLarge";
    case ErrorCode::DateOutOfRange: return "DateOutOfRange";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownFunction: return "UnknownFunction";
    case ErrorCode::UnknownField: return "UnknownField";
    case ErrorCode::ArityError: return "ArityError";
    case ErrorCode::BadWindow: return "BadWindow";
    case ErrorCode::EmptyCrossSection: return "EmptyCrossSection";
    case ErrorCode::TooFewFactors: return "TooFewFactors";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::NoValidDays: return "NoValidDays";
    case ErrorCode::DuplicateFactorId: return "DuplicateFactorId";
    case ErrorCode::CorruptRecord: return "CorruptRecord";
    case ErrorCode::ShortNotAllowed: return "ShortNotAllowed";
    case ErrorCode::LotViolation: return "LotViolation";
    case ErrorCode::InsufficientAvailableShares: return "InsufficientAvailableShares";
    case ErrorCode::InsufficientCash: return "InsufficientCash";
    case ErrorCode::InsufficientMargin: return "InsufficientMargin";
    case ErrorCode::MissingPrice: return "MissingPrice";
    case ErrorCode::NonPositiveNav: return "NonPositiveNav";
    case ErrorCode::EmptyEnsemble: return "EmptyEnsemble";
    case ErrorCode::UniverseTooSmall: return "UniverseTooSmall";
    case ErrorCode::InvalidTheta: return "InvalidTheta";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::GeneratorExhausted: return "GeneratorExhausted";
    case ErrorCode::CurveTooShort: return "CurveTooShort";
    case ErrorCode::ZeroVolatility: return "ZeroVolatility";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingNav: return "MissingNav";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace alphaloop
