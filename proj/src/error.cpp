#include "effbench/error.hpp"

namespace effbench {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::UnbalancedPanel: return "UnbalancedPanel";
    case ErrorCode::NonPositiveQuantity: return "NonPositiveQuantity";
    case ErrorCode::DuplicateRow: return "DuplicateRow";
    case ErrorCode::DivisionByZero: return "DivisionByZero";
    case ErrorCode::MissingIndexYear: return "MissingIndexYear";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InvalidCovariate: return "InvalidCovariate";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::DegenerateDesign: return "DegenerateDesign";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::Degeneracy: return "Degeneracy";
    case ErrorCode::InsufficientInteriorScores: return "InsufficientInteriorScores";
    case ErrorCode::BootstrapDegenerate: return "BootstrapDegenerate";
    case ErrorCode::CovariateMismatch: return "CovariateMismatch";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::RejectionStall: return "RejectionStall";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::SchemaMismatch:
    case ErrorCode::UnbalancedPanel:
    case ErrorCode::NonPositiveQuantity:
    case ErrorCode::DuplicateRow:
    case ErrorCode::DivisionByZero:
    case ErrorCode::MissingIndexYear:
    case ErrorCode::UnknownVariable:
    case ErrorCode::ZeroVariance:
    case ErrorCode::InvalidCovariate:
    case ErrorCode::CovariateMismatch:
    case ErrorCode::PreconditionViolated:
    case ErrorCode::InvalidArgument:
    case ErrorCode::Io:
      return true;
    default:
      return false;
  }
}

bool is_convergence_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonConvergence:
    case ErrorCode::NonFinite:
    case ErrorCode::SolverFailure:
    case ErrorCode::Degeneracy:
    case ErrorCode::DegenerateDesign:
    case ErrorCode::InsufficientInteriorScores:
    case ErrorCode::BootstrapDegenerate:
    case ErrorCode::RejectionStall:
      return true;
    default:
      return false;
  }
}

}  // namespace effbench
