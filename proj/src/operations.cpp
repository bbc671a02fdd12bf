#include "explore/operations.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include "explore/arima.hpp"
#include "explore/charts.hpp"
#include "explore/data_ops.hpp"
#include "explore/json_codec.hpp"

namespace explore::ops {

namespace {

using codec::encode;

[[noreturn]] void bad_request(const std::string& message) {
    throw Error(ErrorCode::bad_request, message);
}

const Json& require(const Json& request, const char* key) {
    if (!request.is_object() || !request.contains(key)) {
        bad_request(std::string("missing field '") + key + "'");
    }
    return request.at(key);
}

std::string require_string(const Json& request, const char* key) {
    const auto& v = require(request, key);
    if (!v.is_string()) {
        bad_request(std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

std::optional<std::int64_t> optional_int(const Json& request, const char* key) {
    if (!request.is_object()) {
        return std::nullopt;
    }
    const auto it = request.find(key);
    if (it == request.end() || it->is_null()) {
        return std::nullopt;
    }
    if (!it->is_number_integer()) {
        bad_request(std::string("field '") + key + "' must be an integer");
    }
    return it->get<std::int64_t>();
}

std::size_t optional_count(const Json& request, const char* key, std::size_t fallback) {
    const auto v = optional_int(request, key);
    if (!v) {
        return fallback;
    }
    if (*v < 0) {
        throw Error(ErrorCode::invalid_spec, std::string("'") + key + "' must not be negative", {{key, *v}});
    }
    return static_cast<std::size_t>(*v);
}

std::vector<std::string> string_list(const Json& v, const char* key) {
    if (!v.is_array()) {
        bad_request(std::string("field '") + key + "' must be an array of column names");
    }
    std::vector<std::string> out;
    for (const auto& s : v) {
        if (!s.is_string()) {
            bad_request(std::string("field '") + key + "' must be an array of column names");
        }
        out.push_back(s.get<std::string>());
    }
    return out;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool is_period_name(const std::string& name) {
    static const std::array<std::string_view, 5> names{"month", "quarter", "qtr", "period", "q"};
    return std::find(names.begin(), names.end(), lower(name)) != names.end();
}

bool is_time_name(const std::string& name) {
    const auto l = lower(name);
    return l == "year" || l == "date" || l == "time" || is_period_name(name);
}

ts::TimeSeries series_from_request(const Table& table, const Json& request) {
    return ts::build_series(table, series_spec_from_request(table, request));
}

std::optional<ts::ArimaSpec> model_spec(const Json& request) {
    if (!request.is_object()) {
        return std::nullopt;
    }
    const auto it = request.find("spec");
    if (it == request.end() || it->is_null()) {
        return std::nullopt;
    }
    return codec::decode_arima_spec(*it);
}

ts::ArimaModel fit_model(const ts::TimeSeries& series, const Json& request) {
    if (auto spec = model_spec(request)) {
        return ts::fit_arima(series, *spec);
    }
    return ts::auto_fit(series);
}

Json op_rows(const Table& table, const Json& request) {
    const auto offset = optional_count(request, "offset", 0);
    const auto limit = optional_count(request, "limit", kDefaultPageRows);
    if (limit > kMaxPageRows) {
        throw Error(ErrorCode::bad_request, "limit must not exceed " + std::to_string(kMaxPageRows),
                    {{"limit", limit}});
    }
    return encode(table, offset, limit);
}

Json op_chart(const Table& table, const Json& request) {
    const auto kind = require_string(request, "kind");
    const auto columns = string_list(require(request, "columns"), "columns");
    auto need = [&](std::size_t k) {
        if (columns.size() != k) {
            throw Error(ErrorCode::invalid_spec,
                        kind + " charts take " + std::to_string(k) + " column" + (k == 1 ? "" : "s"),
                        {{"kind", kind}, {"columns", columns.size()}});
        }
    };
    if (kind == "histogram") {
        need(1);
        std::optional<std::size_t> bins;
        if (const auto b = optional_int(request, "bins")) {
            if (*b < 0) {
                throw Error(ErrorCode::zero_bins, "bin count must be positive", {{"bins", *b}});
            }
            bins = static_cast<std::size_t>(*b);
        }
        return encode(histogram(table, columns[0], bins));
    }
    if (kind == "scatter" || kind == "line") {
        need(2);
        return encode(xy_series(table, columns[0], columns[1], kind == "line" ? XYKind::line : XYKind::scatter));
    }
    if (kind == "bar") {
        need(1);
        return encode(ChartData{value_counts(table, columns[0])});
    }
    throw Error(ErrorCode::invalid_spec, "unknown chart kind '" + kind + "'", {{"kind", kind}});
}

Json op_series(const Table& table, const Json& request) {
    const auto spec = series_spec_from_request(table, request);
    const auto series = ts::build_series(table, spec);
    return {{"series", encode(series)}, {"plot", encode(ts::plot_data(series, spec.value_col, false))}};
}

std::size_t default_max_lag(const ts::TimeSeries& series) {
    const std::size_t wanted = series.frequency > 1 ? 2 * static_cast<std::size_t>(series.frequency) : 10;
    return std::max<std::size_t>(1, std::min(wanted, series.size() - 1));
}

Json op_ljung_box(const Table& table, const Json& request) {
    const auto series = series_from_request(table, request);
    if (series.size() < 2) {
        throw Error(ErrorCode::series_too_short, "the Ljung-Box test needs at least 2 observations");
    }
    const auto max_lag = optional_count(request, "max_lag", default_max_lag(series));
    if (auto spec = model_spec(request)) {
        return encode(ts::residual_diagnostics(ts::fit_arima(series, *spec), max_lag));
    }
    return encode(ts::ljung_box(series.values, max_lag, optional_count(request, "fitdf", 0)));
}

Json op_ndiffs(const Table& table, const Json& request) {
    const auto series = series_from_request(table, request);
    double alpha = 0.05;
    if (request.is_object() && request.contains("alpha") && !request["alpha"].is_null()) {
        if (!request["alpha"].is_number()) {
            bad_request("field 'alpha' must be a number");
        }
        alpha = request["alpha"].get<double>();
    }
    const auto max_d = static_cast<int>(optional_count(request, "max_d", 2));
    const int d = ts::ndiffs(series.values, alpha, max_d);
    return {{"d", d}, {"kpss", encode(ts::kpss_test(series.values))}};
}

Json op_diff(const Table& table, const Json& request) {
    const auto spec = series_spec_from_request(table, request);
    const auto series = ts::build_series(table, spec);
    const auto lag = optional_count(request, "lag", 1);
    const auto order = optional_count(request, "order", 1);
    if (lag < 1 || order < 1) {
        throw Error(ErrorCode::invalid_spec, "lag and order must be at least 1", {{"lag", lag}, {"order", order}});
    }
    return encode(ts::plot_data(ts::difference(series, lag, order), spec.value_col, true));
}

Json op_forecast(const Table& table, const Json& request) {
    const auto series = series_from_request(table, request);
    const auto h = optional_int(request, "horizon");
    if (!h) {
        bad_request("missing field 'horizon'");
    }
    const auto limit = max_horizon(series.frequency);
    if (*h < 1 || static_cast<std::size_t>(*h) > limit) {
        throw Error(ErrorCode::horizon_out_of_range,
                    "horizon must lie in [1, " + std::to_string(limit) + "] for this series",
                    {{"horizon", *h}, {"max", limit}});
    }
    std::vector<double> levels(ts::kDefaultLevels.begin(), ts::kDefaultLevels.end());
    if (request.contains("levels") && !request["levels"].is_null()) {
        const auto& l = request["levels"];
        if (!l.is_array()) {
            bad_request("field 'levels' must be an array of numbers");
        }
        levels.clear();
        for (const auto& v : l) {
            if (!v.is_number()) {
                bad_request("field 'levels' must be an array of numbers");
            }
            levels.push_back(v.get<double>());
        }
    }
    const auto model = fit_model(series, request);
    return encode(ts::forecast(model, static_cast<std::size_t>(*h), levels));
}

}  // namespace

ts::SeriesSpec default_series_spec(const Table& table) {
    ts::SeriesSpec spec;
    const Column* date_col = nullptr;
    const Column* year_col = nullptr;
    const Column* period_col = nullptr;
    for (const auto& c : table.columns()) {
        const auto name = lower(c.name());
        if (c.dtype() == DType::date && !date_col) {
            date_col = &c;
        } else if (c.dtype() == DType::integer && name == "year" && !year_col) {
            year_col = &c;
        } else if (c.dtype() == DType::integer && is_period_name(c.name()) && !period_col) {
            period_col = &c;
        }
    }
    for (auto it = table.columns().rbegin(); it != table.columns().rend(); ++it) {
        if (is_numeric(it->dtype()) && !is_time_name(it->name())) {
            spec.value_col = it->name();
            break;
        }
    }
    if (spec.value_col.empty()) {
        throw Error(ErrorCode::non_numeric_column, "the table has no numeric column to use as a series");
    }
    if (date_col) {
        spec.time = ts::DateColumnTime{date_col->name()};
    } else if (year_col) {
        ts::YearPeriodTime t{year_col->name(), std::nullopt};
        if (period_col) {
            t.period_col = period_col->name();
        }
        spec.time = t;
    } else {
        spec.time = ts::ExplicitTime{};
    }
    return spec;
}

ts::SeriesSpec series_spec_from_request(const Table& table, const Json& request) {
    if (!request.is_object()) {
        return default_series_spec(table);
    }
    if (request.contains("time") && request.contains("value_col")) {
        return codec::decode_series_spec(request);
    }
    if (!request.contains("value_col") && !request.contains("time")) {
        auto spec = default_series_spec(table);
        if (const auto f = optional_int(request, "frequency")) {
            spec.frequency = static_cast<int>(*f);
        }
        return spec;
    }
    Json filled = request;
    if (!request.contains("value_col")) {
        filled["value_col"] = default_series_spec(table).value_col;
    }
    if (!request.contains("time")) {
        filled["time"] = codec::encode(default_series_spec(table)).at("time");
    }
    return codec::decode_series_spec(filled);
}

bool is_operation(std::string_view operation) {
    static const std::array<std::string_view, 14> names{"schema", "rows",   "filter",   "select",    "aggregate",
                                                        "summary", "value_counts", "chart", "series", "ljung_box",
                                                        "ndiffs",  "diff",   "fit",      "forecast"};
    return std::find(names.begin(), names.end(), operation) != names.end();
}

Json run(std::string_view operation, const Table& table, const Json& request) {
    if (operation == "schema") {
        return encode(schema(table));
    }
    if (operation == "rows") {
        return op_rows(table, request);
    }
    if (operation == "filter") {
        return encode(filter_rows(table, codec::decode_predicate(require(request, "predicate"))));
    }
    if (operation == "select") {
        return encode(select_columns(table, string_list(require(request, "columns"), "columns")));
    }
    if (operation == "aggregate") {
        return encode(group_aggregate(table, codec::decode_aggregation(request)));
    }
    if (operation == "summary") {
        return encode(summarize_column(table, require_string(request, "column")));
    }
    if (operation == "value_counts") {
        return encode(value_counts(table, require_string(request, "column")));
    }
    if (operation == "chart") {
        return op_chart(table, request);
    }
    if (operation == "series") {
        return op_series(table, request);
    }
    if (operation == "ljung_box") {
        return op_ljung_box(table, request);
    }
    if (operation == "ndiffs") {
        return op_ndiffs(table, request);
    }
    if (operation == "diff") {
        return op_diff(table, request);
    }
    if (operation == "fit") {
        return encode(fit_model(series_from_request(table, request), request));
    }
    if (operation == "forecast") {
        return op_forecast(table, request);
    }
    throw Error(ErrorCode::not_found, "unknown operation '" + std::string(operation) + "'");
}

}  // namespace explore::ops
