#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace piezo {

enum class ErrorCode {
  NonPositiveCoefficient,
  MixingOutOfRange,
  NonFiniteInput,
  NegativeArgument,
  DegenerateGrid,
  InvalidKernel,
  MixingAtEndpoint,
  InvalidGrid,
  HistoryRequiredForPositiveM,
  ShapeMismatch,
  SingularOperator,
  SolverFailure,
  IncompatibleSpec,
  NonPositiveEnergy,
  ResolventSingular,
  EigensolverFailure,
  OnSpectrum,
  InsufficientTail,
  InvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& msg)
      : std::runtime_error(std::string(to_string(code)) + ": " + msg), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace piezo
