#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace qc {

// Machine-readable failure categories. The string form (see to_string) is what
// the gateway and CLI surface to callers.
enum class ErrorCode {
  invalid_range,
  uncovered_scenario,
  out_of_range,
  non_positive_signal,
  invalid_parameter,
  empty_input,
  invalid_capacity,
  zero_draw,
  parse_error,
  validation,
  conflict,
  storage,
  unknown_node,
  no_data,
  lone_node,
  insufficient_data,
  degenerate_predictor,
  no_overlap,
  empty_signature,
  insufficient_gps,
  insufficient_pairs,
};

std::string_view to_string(ErrorCode code);
std::optional<ErrorCode> error_code_from_string(std::string_view text);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Invariant violation on a named field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message)
      : Error(ErrorCode::validation, field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// Malformed input; line is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + message), line_(line), detail_(message) {}

  std::size_t line() const noexcept { return line_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

}  // namespace qc
