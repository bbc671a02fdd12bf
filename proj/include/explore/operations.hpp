#pragma once

#include <string_view>

#include <nlohmann/json.hpp>

#include "explore/table.hpp"
#include "explore/timeseries.hpp"

namespace explore::ops {

using Json = nlohmann::json;

inline constexpr std::size_t kMaxPageRows = 1000;
inline constexpr std::size_t kDefaultPageRows = 100;

/// Runs one analysis operation on a table. `operation` is one of schema, rows, filter, select,
/// aggregate, summary, value_counts, chart, series, ljung_box, ndiffs, diff, fit, forecast.
/// The request and response use the same JSON encodings for the service and the CLI.
Json run(std::string_view operation, const Table& table, const Json& request);

/// True when `operation` names a known analysis operation.
bool is_operation(std::string_view operation);

/// Series layout guessed from column names and types: a date column, or year plus an optional
/// month/quarter/period column, else an annual series starting at year 1. The value column is
/// the last numeric column that is not a time column.
ts::SeriesSpec default_series_spec(const Table& table);

/// Series spec from the request fields value_col, time and frequency, falling back to
/// default_series_spec for whatever is absent.
ts::SeriesSpec series_spec_from_request(const Table& table, const Json& request);

/// Largest forecast horizon offered for a series frequency.
inline std::size_t max_horizon(int frequency) { return 5 * static_cast<std::size_t>(frequency); }

}  // namespace explore::ops
