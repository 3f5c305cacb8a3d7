#pragma once

#include <stdexcept>
#include <string>

namespace kst {

enum class ErrorCode {
  SingularMatrix,
  NotOrthogonal,
  NotSPD,
  DomainError,
  InvalidGrid,
  GridTooSmall,
  TooLarge,
  ZeroField,
  NonPositiveMoment,
  HypothesisViolated,
  BadExponent,
  BadParameter,
  SupportTooLarge,
  CflViolation,
  ConfigInvalid,
  NonFiniteField,
  ParseError,
  IoError,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable error code; what() is "<Code>: <detail>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace kst
