#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace effbench {

enum class ErrorCode {
  // panel-core
  SchemaMismatch,
  UnbalancedPanel,
  NonPositiveQuantity,
  DuplicateRow,
  DivisionByZero,
  MissingIndexYear,
  UnknownVariable,
  ZeroVariance,
  InvalidCovariate,
  // dea-engine
  SolverFailure,
  // sfa-engine
  DegenerateDesign,
  NonFinite,
  NonConvergence,
  // second-stage
  Degeneracy,
  InsufficientInteriorScores,
  BootstrapDegenerate,
  CovariateMismatch,
  PreconditionViolated,
  // synthgen
  RejectionStall,
  // plumbing
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by bad input data or configuration (CLI exit code 2).
bool is_validation_error(ErrorCode code);

/// True for estimation failures (CLI exit code 3).
bool is_convergence_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  /// The message without the code prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace effbench
