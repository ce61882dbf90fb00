#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace distval {

enum class ErrorCode {
  // input validation
  index_out_of_range,
  already_member,
  too_many_players,
  out_of_range,
  negative_sigma,
  non_finite,
  invalid_weights,
  not_normalized,
  self_membership,
  bad_permutation,
  invalid_classes,
  unsupported_family,
  family_mismatch,
  spec_validation,
  invalid_argument,
  // oracle side
  oracle_failure,
  bridge_start_failure,
  protocol_violation,
  timeout,
  // numerics
  normalization_failure,
};

enum class ErrorCategory { validation, oracle, numeric };

std::string_view to_string(ErrorCode code);
ErrorCategory category_of(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }

 private:
  ErrorCode code_;
};

}  // namespace distval
