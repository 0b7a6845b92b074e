#include "qc/error.hpp"

namespace qc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_range: return "invalid-range";
    case ErrorCode::uncovered_scenario: return "uncovered-scenario";
    case ErrorCode::out_of_range: return "out-of-range";
    case ErrorCode::non_positive_signal: return "non-positive-signal";
    case ErrorCode::invalid_parameter: return "invalid-parameter";
    case ErrorCode::empty_input: return "empty-input";
    case ErrorCode::invalid_capacity: return "invalid-capacity";
    case ErrorCode::zero_draw: return "zero-draw";
    case ErrorCode::parse_error: return "parse-error";
    case ErrorCode::validation: return "validation";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::storage: return "storage-error";
    case ErrorCode::unknown_node: return "unknown-node";
    case ErrorCode::no_data: return "no-data";
    case ErrorCode::lone_node: return "lone-node";
    case ErrorCode::insufficient_data: return "insufficient-data";
    case ErrorCode::degenerate_predictor: return "degenerate-predictor";
    case ErrorCode::no_overlap: return "no-overlap";
    case ErrorCode::empty_signature: return "empty-signature";
    case ErrorCode::insufficient_gps: return "insufficient-gps";
    case ErrorCode::insufficient_pairs: return "insufficient-pairs";
  }
  return "unknown";
}

std::optional<ErrorCode> error_code_from_string(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(ErrorCode::insufficient_pairs); ++i) {
    const auto code = static_cast<ErrorCode>(i);
    if (to_string(code) == text) return code;
  }
  return std::nullopt;
}

}  // namespace qc
