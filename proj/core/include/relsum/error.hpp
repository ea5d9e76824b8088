#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace relsum {

// Categories double as the machine-parsable token the CLI prints on failure.
enum class ErrorCategory {
  invalid_argument,
  io,
  parse,
  duplicate_id,
  unusable_target,
  unknown_node,
  empty_graph,
  dimension_mismatch,
  config,
  non_finite,
  missing_artifact,
  config_mismatch,
  leakage,
};

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

}  // namespace relsum
