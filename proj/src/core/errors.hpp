#ifndef GENREL_ERRORS_HPP
#define GENREL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace genrel {

enum class ErrorCode {
  ok = 0,
  invalid_argument,
  empty_dataset,
  ragged_rows,
  no_trait_observed,
  non_finite_value,
  too_few_observations,
  mismatched_plan,
  fold_leakage,
  empty_fold,
  degenerate_response,
  too_few_rows,
  singular_system,
  non_finite_loss,
  dimension_mismatch,
  non_positive_genetic_variance,
  degenerate_variance,
  out_of_range,
  bad_spec,
  header_mismatch,
  inconsistent_indicator,
  non_numeric_cell,
  config_error,
  io_error,
  serialization_invariant,
  all_replications_failed,
  unsupported,
  internal,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ok: return "Ok";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::empty_dataset: return "EmptyDataset";
    case ErrorCode::ragged_rows: return "RaggedRows";
    case ErrorCode::no_trait_observed: return "NoTraitObserved";
    case ErrorCode::non_finite_value: return "NonFiniteValue";
    case ErrorCode::too_few_observations: return "TooFewObservations";
    case ErrorCode::mismatched_plan: return "MismatchedPlan";
    case ErrorCode::fold_leakage: return "FoldLeakage";
    case ErrorCode::empty_fold: return "EmptyFold";
    case ErrorCode::degenerate_response: return "DegenerateResponse";
    case ErrorCode::too_few_rows: return "TooFewRows";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::non_finite_loss: return "NonFiniteLoss";
    case ErrorCode::dimension_mismatch: return "DimensionMismatch";
    case ErrorCode::non_positive_genetic_variance: return "NonPositiveGeneticVariance";
    case ErrorCode::degenerate_variance: return "DegenerateVariance";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::bad_spec: return "BadSpec";
    case ErrorCode::header_mismatch: return "HeaderMismatch";
    case ErrorCode::inconsistent_indicator: return "InconsistentIndicator";
    case ErrorCode::non_numeric_cell: return "NonNumericCell";
    case ErrorCode::config_error: return "ConfigError";
    case ErrorCode::io_error: return "IoError";
    case ErrorCode::serialization_invariant: return "SerializationInvariant";
    case ErrorCode::all_replications_failed: return "AllReplicationsFailed";
    case ErrorCode::unsupported: return "Unsupported";
    case ErrorCode::internal: return "InternalError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace genrel

#endif
