#pragma once

#include <stdexcept>
#include <string>

namespace qlab {

enum class ErrorCode {
  GridTooNarrow,
  ZeroWeight,
  ZeroNorm,
  MarginViolation,
  GridMismatch,
  RoughField,
  RoughLambda,
  DimensionMismatch,
  Delocalized,
  MissingPacket,
  UnstableStep,
  NonzeroVectorPotential,
  NonuniformVectorPotential,
  TooRelativistic,
  ZeroBin,
  PartitionGap,
  ConfigInvalid,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::GridTooNarrow: return "GridTooNarrow";
    case ErrorCode::ZeroWeight: return "ZeroWeight";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::MarginViolation: return "MarginViolation";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::RoughField: return "RoughField";
    case ErrorCode::RoughLambda: return "RoughLambda";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::Delocalized: return "Delocalized";
    case ErrorCode::MissingPacket: return "MissingPacket";
    case ErrorCode::UnstableStep: return "UnstableStep";
    case ErrorCode::NonzeroVectorPotential: return "NonzeroVectorPotential";
    case ErrorCode::NonuniformVectorPotential: return "NonuniformVectorPotential";
    case ErrorCode::TooRelativistic: return "TooRelativistic";
    case ErrorCode::ZeroBin: return "ZeroBin";
    case ErrorCode::PartitionGap: return "PartitionGap";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
  }
  return "Unknown";
}

/// Library error type. `code()` maps one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qlab
