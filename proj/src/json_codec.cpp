#include "explore/json_codec.hpp"

#include <chrono>
#include <charconv>

namespace explore::codec {

namespace {

[[noreturn]] void malformed(const std::string& what) {
    throw Error(ErrorCode::bad_request, "malformed request: " + what);
}

const Json& field(const Json& json, const char* key) {
    if (!json.is_object()) {
        malformed("expected an object");
    }
    const auto it = json.find(key);
    if (it == json.end()) {
        malformed(std::string("missing field '") + key + "'");
    }
    return *it;
}

std::string get_string(const Json& json, const char* key) {
    const auto& v = field(json, key);
    if (!v.is_string()) {
        malformed(std::string("field '") + key + "' must be a string");
    }
    return v.get<std::string>();
}

std::int64_t get_int(const Json& json, const char* key) {
    const auto& v = field(json, key);
    if (!v.is_number_integer()) {
        malformed(std::string("field '") + key + "' must be an integer");
    }
    return v.get<std::int64_t>();
}

double get_number(const Json& v, const char* what) {
    if (!v.is_number()) {
        malformed(std::string(what) + " must be a number");
    }
    return v.get<double>();
}

Json optional_number(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::optional<double> decode_optional_number(const Json& json, const char* key) {
    const auto& v = field(json, key);
    if (v.is_null()) {
        return std::nullopt;
    }
    return get_number(v, key);
}

Json encode_predicate_operand(const Value& v) {
    return encode(v);
}

Value decode_operand(const Json& json) {
    if (json.is_null()) {
        return {};
    }
    if (json.is_boolean()) {
        return json.get<bool>();
    }
    if (json.is_number_integer()) {
        return json.get<std::int64_t>();
    }
    if (json.is_number()) {
        return json.get<double>();
    }
    if (json.is_string()) {
        return json.get<std::string>();
    }
    malformed("predicate value must be a scalar");
}

int spec_order(const Json& json, const char* key) {
    const auto it = json.find(key);
    if (it == json.end()) {
        return 0;
    }
    if (!it->is_number_integer()) {
        malformed(std::string("order '") + key + "' must be an integer");
    }
    return it->get<int>();
}

}  // namespace

Date date_from_days(std::int64_t days) {
    const std::chrono::year_month_day ymd{std::chrono::sys_days{std::chrono::days{days}}};
    return {static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
            static_cast<int>(static_cast<unsigned>(ymd.day()))};
}

Json encode(const Value& value) {
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, Date>) {
                return format_date(v);
            } else {
                return v;
            }
        },
        value);
}

Value decode_value(const Json& json, DType dtype) {
    if (json.is_null()) {
        return {};
    }
    switch (dtype) {
        case DType::integer:
            if (json.is_number_integer()) {
                return json.get<std::int64_t>();
            }
            break;
        case DType::real:
            if (json.is_number()) {
                return json.get<double>();
            }
            break;
        case DType::boolean:
            if (json.is_boolean()) {
                return json.get<bool>();
            }
            break;
        case DType::text:
            if (json.is_string()) {
                return json.get<std::string>();
            }
            break;
        case DType::date:
            if (json.is_string()) {
                if (auto d = parse_date(json.get<std::string>())) {
                    return *d;
                }
            }
            break;
    }
    malformed("cell " + json.dump() + " does not match dtype " + std::string(to_string(dtype)));
}

Json encode(const Schema& schema) {
    Json columns = Json::array();
    for (const auto& c : schema.columns) {
        columns.push_back({{"name", c.name},
                           {"dtype", to_string(c.dtype)},
                           {"n_missing", c.n_missing},
                           {"n_distinct", c.n_distinct}});
    }
    return {{"n_rows", schema.n_rows}, {"columns", std::move(columns)}};
}

Schema decode_schema(const Json& json) {
    Schema s;
    s.n_rows = static_cast<std::size_t>(get_int(json, "n_rows"));
    for (const auto& c : field(json, "columns")) {
        const auto dtype = parse_dtype(get_string(c, "dtype"));
        if (!dtype) {
            malformed("unknown dtype");
        }
        s.columns.push_back({get_string(c, "name"), *dtype, static_cast<std::size_t>(get_int(c, "n_missing")),
                             static_cast<std::size_t>(get_int(c, "n_distinct"))});
    }
    return s;
}

Json encode(const Table& table, std::size_t offset, std::size_t limit) {
    Json columns = Json::array();
    for (const auto& c : table.columns()) {
        columns.push_back({{"name", c.name()}, {"dtype", to_string(c.dtype())}});
    }
    Json rows = Json::array();
    const auto begin = std::min(offset, table.n_rows());
    const auto end = begin + std::min(limit, table.n_rows() - begin);
    for (std::size_t r = begin; r < end; ++r) {
        Json row = Json::array();
        for (const auto& c : table.columns()) {
            row.push_back(encode(c[r]));
        }
        rows.push_back(std::move(row));
    }
    return {{"name", table.name()},
            {"columns", std::move(columns)},
            {"n_rows", table.n_rows()},
            {"offset", begin},
            {"rows", std::move(rows)}};
}

Table decode_table(const Json& json) {
    const auto& cols = field(json, "columns");
    const auto& rows = field(json, "rows");
    if (!cols.is_array() || !rows.is_array()) {
        malformed("columns and rows must be arrays");
    }
    std::vector<std::string> names;
    std::vector<DType> dtypes;
    for (const auto& c : cols) {
        const auto dtype = parse_dtype(get_string(c, "dtype"));
        if (!dtype) {
            malformed("unknown dtype");
        }
        names.push_back(get_string(c, "name"));
        dtypes.push_back(*dtype);
    }
    std::vector<std::vector<Value>> cells(names.size());
    for (const auto& row : rows) {
        if (!row.is_array() || row.size() != names.size()) {
            malformed("row width does not match columns");
        }
        for (std::size_t j = 0; j < names.size(); ++j) {
            cells[j].push_back(decode_value(row[j], dtypes[j]));
        }
    }
    std::vector<Column> columns;
    for (std::size_t j = 0; j < names.size(); ++j) {
        columns.emplace_back(names[j], dtypes[j], std::move(cells[j]));
    }
    return Table(json.contains("name") ? get_string(json, "name") : "data", std::move(columns));
}

Json encode(const ColumnSummary& s) {
    return {{"n", s.n},           {"n_missing", s.n_missing}, {"min", s.min},   {"q1", s.q1},
            {"median", s.median}, {"q3", s.q3},               {"max", s.max},   {"mean", s.mean},
            {"sd", optional_number(s.sd)}};
}

ColumnSummary decode_summary(const Json& json) {
    ColumnSummary s;
    s.n = static_cast<std::size_t>(get_int(json, "n"));
    s.n_missing = static_cast<std::size_t>(get_int(json, "n_missing"));
    s.min = get_number(field(json, "min"), "min");
    s.q1 = get_number(field(json, "q1"), "q1");
    s.median = get_number(field(json, "median"), "median");
    s.q3 = get_number(field(json, "q3"), "q3");
    s.max = get_number(field(json, "max"), "max");
    s.mean = get_number(field(json, "mean"), "mean");
    s.sd = decode_optional_number(json, "sd");
    return s;
}

Json encode(const FrequencyTable& table) {
    Json entries = Json::array();
    for (const auto& e : table.entries) {
        entries.push_back({{"level", e.level}, {"count", e.count}});
    }
    return {{"entries", std::move(entries)}};
}

FrequencyTable decode_frequency_table(const Json& json) {
    FrequencyTable t;
    for (const auto& e : field(json, "entries")) {
        t.entries.push_back({get_string(e, "level"), static_cast<std::size_t>(get_int(e, "count"))});
    }
    return t;
}

Json encode(const HistogramData& data) {
    return {{"kind", "histogram"},
            {"label", data.label},
            {"edges", data.edges},
            {"counts", data.counts},
            {"n_used", data.n_used}};
}

Json encode(const XYSeries& data) {
    Json points = Json::array();
    for (const auto& p : data.points) {
        const Json x = data.x_is_date ? Json(format_date(date_from_days(static_cast<std::int64_t>(p.x)))) : Json(p.x);
        points.push_back({{"x", x}, {"y", p.y}});
    }
    return {{"kind", data.kind == XYKind::scatter ? "scatter" : "line"},
            {"x_label", data.x_label},
            {"y_label", data.y_label},
            {"x_is_date", data.x_is_date},
            {"points", std::move(points)}};
}

Json encode(const SeriesPlotData& data) {
    return {{"kind", "series"},
            {"label", data.label},
            {"times", data.times},
            {"values", data.values},
            {"reference_line", optional_number(data.reference_line)}};
}

Json encode(const ChartData& data) {
    return std::visit(
        [](const auto& d) -> Json {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, FrequencyTable>) {
                Json j = encode(d);
                j["kind"] = "bar";
                return j;
            } else {
                return encode(d);
            }
        },
        data);
}

Json encode(const Predicate& p) {
    switch (p.kind) {
        case Predicate::Kind::compare: {
            Json j{{"column", p.column}, {"op", to_string(p.op)}};
            if (p.op != Comparator::is_missing && p.op != Comparator::not_missing) {
                j["value"] = encode_predicate_operand(p.operand);
            }
            return j;
        }
        case Predicate::Kind::all_of:
        case Predicate::Kind::any_of: {
            Json children = Json::array();
            for (const auto& c : p.children) {
                children.push_back(encode(c));
            }
            return {{p.kind == Predicate::Kind::all_of ? "and" : "or", std::move(children)}};
        }
        case Predicate::Kind::negate:
            return {{"not", encode(p.children.at(0))}};
    }
    return nullptr;
}

Predicate decode_predicate(const Json& json) {
    if (!json.is_object()) {
        malformed("predicate must be an object");
    }
    for (const char* key : {"and", "or"}) {
        if (const auto it = json.find(key); it != json.end()) {
            if (!it->is_array()) {
                malformed(std::string("'") + key + "' must be an array");
            }
            std::vector<Predicate> children;
            for (const auto& c : *it) {
                children.push_back(decode_predicate(c));
            }
            return key[0] == 'a' ? Predicate::all_of(std::move(children)) : Predicate::any_of(std::move(children));
        }
    }
    if (const auto it = json.find("not"); it != json.end()) {
        return Predicate::negate(decode_predicate(*it));
    }
    const auto op_text = get_string(json, "op");
    const auto op = parse_comparator(op_text);
    if (!op) {
        throw Error(ErrorCode::invalid_spec, "unknown comparator '" + op_text + "'", {{"op", op_text}});
    }
    Value operand;
    if (*op != Comparator::is_missing && *op != Comparator::not_missing) {
        operand = decode_operand(field(json, "value"));
    }
    return Predicate::compare(get_string(json, "column"), *op, std::move(operand));
}

Json encode(const AggregationSpec& spec) {
    Json measures = Json::array();
    for (const auto& m : spec.measures) {
        measures.push_back({{"column", m.column}, {"function", to_string(m.function)}});
    }
    return {{"group_keys", spec.group_keys}, {"measures", std::move(measures)}};
}

AggregationSpec decode_aggregation(const Json& json) {
    AggregationSpec spec;
    const auto& keys = field(json, "group_keys");
    if (!keys.is_array()) {
        malformed("group_keys must be an array");
    }
    for (const auto& k : keys) {
        if (!k.is_string()) {
            malformed("group key must be a string");
        }
        spec.group_keys.push_back(k.get<std::string>());
    }
    const auto& measures = field(json, "measures");
    if (!measures.is_array()) {
        malformed("measures must be an array");
    }
    for (const auto& m : measures) {
        const auto name = get_string(m, "function");
        const auto fn = parse_agg_function(name);
        if (!fn) {
            throw Error(ErrorCode::invalid_spec, "unknown aggregate function '" + name + "'", {{"function", name}});
        }
        spec.measures.push_back({get_string(m, "column"), *fn});
    }
    return spec;
}

Json encode(const ts::TimeSeries& series) {
    return {{"values", series.values},
            {"start_year", series.start_year},
            {"start_period", series.start_period},
            {"frequency", series.frequency},
            {"times", ts::time_labels(series)}};
}

Json encode(const ts::SeriesSpec& spec) {
    Json time = std::visit(
        [](const auto& t) -> Json {
            using T = std::decay_t<decltype(t)>;
            if constexpr (std::is_same_v<T, ts::DateColumnTime>) {
                return {{"date_col", t.date_col}};
            } else if constexpr (std::is_same_v<T, ts::YearPeriodTime>) {
                Json j{{"year_col", t.year_col}};
                if (t.period_col) {
                    j["period_col"] = *t.period_col;
                }
                return j;
            } else {
                return {{"start_year", t.start_year}, {"start_period", t.start_period}, {"frequency", t.frequency}};
            }
        },
        spec.time);
    Json j{{"value_col", spec.value_col}, {"time", std::move(time)}};
    if (spec.frequency) {
        j["frequency"] = *spec.frequency;
    }
    return j;
}

ts::SeriesSpec decode_series_spec(const Json& json) {
    ts::SeriesSpec spec;
    spec.value_col = get_string(json, "value_col");
    if (const auto it = json.find("frequency"); it != json.end() && !it->is_null()) {
        spec.frequency = static_cast<int>(get_int(json, "frequency"));
    }
    const auto& time = field(json, "time");
    if (time.contains("date_col")) {
        spec.time = ts::DateColumnTime{get_string(time, "date_col")};
    } else if (time.contains("year_col")) {
        ts::YearPeriodTime t{get_string(time, "year_col"), std::nullopt};
        if (const auto it = time.find("period_col"); it != time.end() && !it->is_null()) {
            t.period_col = get_string(time, "period_col");
        }
        spec.time = t;
    } else if (time.contains("start_year")) {
        ts::ExplicitTime t;
        t.start_year = static_cast<int>(get_int(time, "start_year"));
        t.start_period = time.contains("start_period") ? static_cast<int>(get_int(time, "start_period")) : 1;
        t.frequency = time.contains("frequency") ? static_cast<int>(get_int(time, "frequency"))
                                                 : spec.frequency.value_or(1);
        spec.time = t;
    } else {
        malformed("time must give date_col, year_col or start_year");
    }
    return spec;
}

Json encode(const ts::LjungBoxResult& result) {
    Json entries = Json::array();
    for (const auto& e : result.entries) {
        entries.push_back(
            {{"lag", e.lag}, {"rho", e.rho}, {"q", e.q}, {"df", e.df}, {"p_value", optional_number(e.p_value)}});
    }
    return {{"fitdf", result.fitdf}, {"entries", std::move(entries)}};
}

Json encode(const ts::KpssResult& result) {
    Json critical = Json::object();
    for (const auto& [alpha, value] : result.critical_values) {
        critical[format_real(alpha)] = value;
    }
    return {{"statistic", result.statistic},
            {"lag_truncation", result.lag_truncation},
            {"critical_values", std::move(critical)},
            {"reject_at_5pct", result.reject_at_5pct}};
}

Json encode(const ts::ArimaSpec& spec) {
    return {{"p", spec.p}, {"d", spec.d}, {"q", spec.q}, {"P", spec.P},
            {"D", spec.D}, {"Q", spec.Q}, {"s", spec.s}, {"include_mean", spec.include_mean}};
}

ts::ArimaSpec decode_arima_spec(const Json& json) {
    ts::ArimaSpec spec;
    if (json.is_string()) {
        const auto text = json.get<std::string>();
        std::vector<int> orders;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            auto comma = text.find(',', pos);
            if (comma == std::string::npos) {
                comma = text.size();
            }
            int v = 0;
            const auto* first = text.data() + pos;
            const auto* last = text.data() + comma;
            while (first < last && *first == ' ') {
                ++first;
            }
            while (last > first && last[-1] == ' ') {
                --last;
            }
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (ec != std::errc{} || ptr != last || first == last) {
                throw Error(ErrorCode::invalid_spec, "model orders must look like p,d,q or p,d,q,P,D,Q",
                            {{"spec", text}});
            }
            orders.push_back(v);
            pos = comma + 1;
        }
        if (orders.size() != 3 && orders.size() != 6) {
            throw Error(ErrorCode::invalid_spec, "model orders must look like p,d,q or p,d,q,P,D,Q", {{"spec", text}});
        }
        spec.p = orders[0];
        spec.d = orders[1];
        spec.q = orders[2];
        if (orders.size() == 6) {
            spec.P = orders[3];
            spec.D = orders[4];
            spec.Q = orders[5];
        }
        spec.include_mean = spec.d == 0 && spec.D == 0;
        return spec;
    }
    if (!json.is_object()) {
        malformed("model spec must be an object or a string");
    }
    spec.p = spec_order(json, "p");
    spec.d = spec_order(json, "d");
    spec.q = spec_order(json, "q");
    spec.P = spec_order(json, "P");
    spec.D = spec_order(json, "D");
    spec.Q = spec_order(json, "Q");
    spec.s = spec_order(json, "s");
    if (const auto it = json.find("include_mean"); it != json.end() && !it->is_null()) {
        if (!it->is_boolean()) {
            malformed("include_mean must be a boolean");
        }
        spec.include_mean = it->get<bool>();
    } else {
        spec.include_mean = spec.d == 0 && spec.D == 0;
    }
    return spec;
}

Json encode(const ts::ArimaModel& m) {
    return {{"spec", encode(m.spec)},
            {"ar", m.ar},
            {"ma", m.ma},
            {"sar", m.sar},
            {"sma", m.sma},
            {"mean", optional_number(m.mean)},
            {"sigma2", m.sigma2},
            {"loglik", m.loglik},
            {"aic", m.aic},
            {"aicc", m.aicc},
            {"bic", m.bic},
            {"n_obs", m.n_obs},
            {"standard_errors", m.standard_errors},
            {"residuals", m.residuals}};
}

Json encode(const ts::Forecast& f) {
    Json intervals = Json::array();
    for (const auto& i : f.intervals) {
        intervals.push_back({{"level", i.level}, {"lower", i.lower}, {"upper", i.upper}});
    }
    return {{"horizon", f.horizon},
            {"times", f.times},
            {"point", f.point},
            {"std_error", f.std_error},
            {"intervals", std::move(intervals)}};
}

Json encode(const Error& error) {
    return {{"error", {{"code", to_string(error.code())}, {"message", error.what()}, {"detail", error.detail()}}}};
}

Json encode(const ParseOptions& options) {
    return {{"delimiter", std::string(1, options.delimiter)},
            {"has_header", options.has_header},
            {"na_tokens", options.na_tokens}};
}

ParseOptions decode_parse_options(const Json& json) {
    ParseOptions options;
    if (json.is_null()) {
        return options;
    }
    if (!json.is_object()) {
        malformed("parse options must be an object");
    }
    if (const auto it = json.find("delimiter"); it != json.end()) {
        if (!it->is_string() || it->get<std::string>().size() != 1) {
            malformed("delimiter must be a single character");
        }
        options.delimiter = it->get<std::string>()[0];
    }
    if (const auto it = json.find("has_header"); it != json.end()) {
        if (!it->is_boolean()) {
            malformed("has_header must be a boolean");
        }
        options.has_header = it->get<bool>();
    }
    if (const auto it = json.find("na_tokens"); it != json.end()) {
        if (!it->is_array()) {
            malformed("na_tokens must be an array");
        }
        options.na_tokens.clear();
        for (const auto& t : *it) {
            if (!t.is_string()) {
                malformed("na token must be a string");
            }
            options.na_tokens.insert(t.get<std::string>());
        }
    }
    return options;
}

}  // namespace explore::codec
