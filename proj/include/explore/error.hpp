#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace explore {

/// Machine-readable failure categories shared by the library, the service and the CLI.
enum class ErrorCode {
    empty_input,
    ragged_rows,
    encoding_error,
    unsupported_format,
    invalid_header,
    unknown_column,
    type_mismatch,
    duplicate_selection,
    non_numeric_column,
    all_missing,
    invalid_spec,
    zero_bins,
    empty_data,
    gap_in_series,
    duplicate_timestamp,
    missing_value_in_series,
    unsupported_frequency,
    constant_series,
    lag_out_of_range,
    series_too_short,
    too_few_observations,
    non_convergence,
    non_invertible_start,
    horizon_out_of_range,
    unknown_dataset,
    payload_too_large,
    bad_request,
    not_found,
    internal_error,
};

std::string_view to_string(ErrorCode code);

/// HTTP status a given code maps to (4xx caller faults, 5xx otherwise).
int http_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, nlohmann::json detail = nullptr)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const nlohmann::json& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    nlohmann::json detail_;
};

}  // namespace explore
