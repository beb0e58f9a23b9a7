#pragma once

#include <stdexcept>
#include <string>

namespace ddfc {

// Stable error identifiers; the CLI maps these onto process exit codes.
enum class ErrorCode {
  InvalidArgument,
  MarginallyStable,
  DepthExceedsData,
  InconsistentDataset,
  EmptyTruncation,
  DcGainIdentificationFailed,
  InfeasibleInitialization,
  NumericalDivergence,
  DatasetRequired,
  ConfigError,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode c) {
  switch (c) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MarginallyStable: return "MarginallyStable";
    case ErrorCode::DepthExceedsData: return "DepthExceedsData";
    case ErrorCode::InconsistentDataset: return "InconsistentDataset";
    case ErrorCode::EmptyTruncation: return "EmptyTruncation";
    case ErrorCode::DcGainIdentificationFailed: return "DcGainIdentificationFailed";
    case ErrorCode::InfeasibleInitialization: return "InfeasibleInitialization";
    case ErrorCode::NumericalDivergence: return "NumericalDivergence";
    case ErrorCode::DatasetRequired: return "DatasetRequired";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace ddfc
