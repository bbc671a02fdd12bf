#include "explore/error.hpp"

namespace explore {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::ragged_rows: return "ragged_rows";
        case ErrorCode::encoding_error: return "encoding_error";
        case ErrorCode::unsupported_format: return "unsupported_format";
        case ErrorCode::invalid_header: return "invalid_header";
        case ErrorCode::unknown_column: return "unknown_column";
        case ErrorCode::type_mismatch: return "type_mismatch";
        case ErrorCode::duplicate_selection: return "duplicate_selection";
        case ErrorCode::non_numeric_column: return "non_numeric_column";
        case ErrorCode::all_missing: return "all_missing";
        case ErrorCode::invalid_spec: return "invalid_spec";
        case ErrorCode::zero_bins: return "zero_bins";
        case ErrorCode::empty_data: return "empty_data";
        case ErrorCode::gap_in_series: return "gap_in_series";
        case ErrorCode::duplicate_timestamp: return "duplicate_timestamp";
        case ErrorCode::missing_value_in_series: return "missing_value_in_series";
        case ErrorCode::unsupported_frequency: return "unsupported_frequency";
        case ErrorCode::constant_series: return "constant_series";
        case ErrorCode::lag_out_of_range: return "lag_out_of_range";
        case ErrorCode::series_too_short: return "series_too_short";
        case ErrorCode::too_few_observations: return "too_few_observations";
        case ErrorCode::non_convergence: return "non_convergence";
        case ErrorCode::non_invertible_start: return "non_invertible_start";
        case ErrorCode::horizon_out_of_range: return "horizon_out_of_range";
        case ErrorCode::unknown_dataset: return "unknown_dataset";
        case ErrorCode::payload_too_large: return "payload_too_large";
        case ErrorCode::bad_request: return "bad_request";
        case ErrorCode::not_found: return "not_found";
        case ErrorCode::internal_error: return "internal_error";
    }
    return "internal_error";
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::bad_request: return 400;
        case ErrorCode::unknown_dataset:
        case ErrorCode::not_found: return 404;
        case ErrorCode::payload_too_large: return 413;
        case ErrorCode::unsupported_format: return 415;
        case ErrorCode::non_convergence:
        case ErrorCode::non_invertible_start:
        case ErrorCode::internal_error: return 500;
        default: return 422;
    }
}

}  // namespace explore
