#pragma once

#include <nlohmann/json.hpp>

#include "explore/arima.hpp"
#include "explore/charts.hpp"
#include "explore/data_ops.hpp"
#include "explore/table.hpp"
#include "explore/timeseries.hpp"

namespace explore::codec {

using Json = nlohmann::json;

// Encoders. Dates are ISO strings, missing cells and absent optionals are null.
Json encode(const Value& value);
Json encode(const Schema& schema);
/// {"name", "columns": [{"name", "dtype"}], "n_rows", "rows": [[...]]} for rows [offset, offset + limit).
Json encode(const Table& table, std::size_t offset = 0, std::size_t limit = static_cast<std::size_t>(-1));
Json encode(const ColumnSummary& summary);
Json encode(const FrequencyTable& table);
Json encode(const HistogramData& data);
Json encode(const XYSeries& data);
Json encode(const SeriesPlotData& data);
Json encode(const ChartData& data);
Json encode(const Predicate& predicate);
Json encode(const AggregationSpec& spec);
Json encode(const ts::TimeSeries& series);
Json encode(const ts::SeriesSpec& spec);
Json encode(const ts::LjungBoxResult& result);
Json encode(const ts::KpssResult& result);
Json encode(const ts::ArimaSpec& spec);
Json encode(const ts::ArimaModel& model);
Json encode(const ts::Forecast& forecast);
Json encode(const Error& error);

// Decoders. Malformed input throws Error(bad_request); well-formed but invalid specs throw invalid_spec.
Value decode_value(const Json& json, DType dtype);
Schema decode_schema(const Json& json);
Table decode_table(const Json& json);
ColumnSummary decode_summary(const Json& json);
FrequencyTable decode_frequency_table(const Json& json);
Predicate decode_predicate(const Json& json);
AggregationSpec decode_aggregation(const Json& json);
ts::SeriesSpec decode_series_spec(const Json& json);
/// Accepts {"p","d","q","P","D","Q","s","include_mean"} or the shorthand "p,d,q" / "p,d,q,P,D,Q".
/// include_mean defaults to true when d = D = 0.
ts::ArimaSpec decode_arima_spec(const Json& json);
ParseOptions decode_parse_options(const Json& json);
Json encode(const ParseOptions& options);

/// Days since 1970-01-01 back to a calendar date.
Date date_from_days(std::int64_t days);

}  // namespace explore::codec
