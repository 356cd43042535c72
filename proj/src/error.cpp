#include "piezo/error.hpp"

namespace piezo {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveCoefficient: return "NonPositiveCoefficient";
    case ErrorCode::MixingOutOfRange: return "MixingOutOfRange";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::DegenerateGrid: return "DegenerateGrid";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::MixingAtEndpoint: return "MixingAtEndpoint";
    case ErrorCode::InvalidGrid: return "InvalidGrid";
    case ErrorCode::HistoryRequiredForPositiveM: return "HistoryRequiredForPositiveM";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SingularOperator: return "SingularOperator";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::IncompatibleSpec: return "IncompatibleSpec";
    case ErrorCode::NonPositiveEnergy: return "NonPositiveEnergy";
    case ErrorCode::ResolventSingular: return "ResolventSingular";
    case ErrorCode::EigensolverFailure: return "EigensolverFailure";
    case ErrorCode::OnSpectrum: return "OnSpectrum";
    case ErrorCode::InsufficientTail: return "InsufficientTail";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace piezo
