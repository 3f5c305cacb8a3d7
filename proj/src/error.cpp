#include "kst/error.hpp"

namespace kst {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::ZeroField: return "ZeroField";
    case ErrorCode::NonPositiveMoment: return "NonPositiveMoment";
    case ErrorCode::HypothesisViolated: return "HypothesisViolated";
    case ErrorCode::BadExponent: return "BadExponent";
    case ErrorCode::BadParameter: return "BadParameter";
    case ErrorCode::SupportTooLarge: return "SupportTooLarge";
    case ErrorCode::CflViolation: return "CflViolation";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::NonFiniteField: return "NonFiniteField";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

}  // namespace kst
