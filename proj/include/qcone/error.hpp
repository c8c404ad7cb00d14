#pragma once

#include <stdexcept>
#include <string>

namespace qcone {

enum class ErrorCode {
  NonHomogeneous,
  NonReal,
  InsufficientSamples,
  NotSymmetric,
  ZeroMatrix,
  PositiveDeterminant,
  NoFiniteSolution,
  NotPreserver,
  SingularMatrix,
  DimensionMismatch,
  NotOneSided,
  VerificationFailed,
  DegenerateBasis,
  QNotZero,
  SchemaError,
  DegreeError,
};

const char* to_string(ErrorCode code);

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHomogeneous: return "NonHomogeneous";
    case ErrorCode::NonReal: return "NonReal";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::PositiveDeterminant: return "PositiveDeterminant";
    case ErrorCode::NoFiniteSolution: return "NoFiniteSolution";
    case ErrorCode::NotPreserver: return "NotPreserver";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NotOneSided: return "NotOneSided";
    case ErrorCode::VerificationFailed: return "VerificationFailed";
    case ErrorCode::DegenerateBasis: return "DegenerateBasis";
    case ErrorCode::QNotZero: return "QNotZero";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::DegreeError: return "DegreeError";
  }
  return "Unknown";
}

}  // namespace qcone
