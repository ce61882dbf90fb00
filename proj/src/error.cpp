#include "distval/error.hpp"

namespace distval {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::index_out_of_range: return "IndexOutOfRange";
    case ErrorCode::already_member: return "AlreadyMember";
    case ErrorCode::too_many_players: return "TooManyPlayers";
    case ErrorCode::out_of_range: return "OutOfRange";
    case ErrorCode::negative_sigma: return "NegativeSigma";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::invalid_weights: return "InvalidWeights";
    case ErrorCode::not_normalized: return "NotNormalized";
    case ErrorCode::self_membership: return "SelfMembership";
    case ErrorCode::bad_permutation: return "BadPermutation";
    case ErrorCode::invalid_classes: return "InvalidClasses";
    case ErrorCode::unsupported_family: return "UnsupportedFamily";
    case ErrorCode::family_mismatch: return "FamilyMismatch";
    case ErrorCode::spec_validation: return "SpecValidation";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::oracle_failure: return "OracleFailure";
    case ErrorCode::bridge_start_failure: return "BridgeStartFailure";
    case ErrorCode::protocol_violation: return "ProtocolViolation";
    case ErrorCode::timeout: return "Timeout";
    case ErrorCode::normalization_failure: return "NormalizationFailure";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::oracle_failure:
    case ErrorCode::bridge_start_failure:
    case ErrorCode::protocol_violation:
    case ErrorCode::timeout:
    case ErrorCode::family_mismatch:
      return ErrorCategory::oracle;
    case ErrorCode::normalization_failure:
    case ErrorCode::non_finite:
      return ErrorCategory::numeric;
    default:
      return ErrorCategory::validation;
  }
}

}  // namespace distval
