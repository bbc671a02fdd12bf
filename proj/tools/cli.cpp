#include "cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "explore/charts.hpp"
#include "explore/json_codec.hpp"
#include "explore/operations.hpp"
#include "explore/service.hpp"

namespace explore::cli {

namespace {

using Json = nlohmann::json;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Inline JSON or @file. Text that is not JSON is kept as a JSON string (for "p,d,q" shorthands).
Json json_argument(const std::string& text, bool allow_plain_string) {
    const auto content = !text.empty() && text[0] == '@' ? read_file(text.substr(1)) : text;
    try {
        return Json::parse(content);
    } catch (const Json::parse_error& e) {
        if (allow_plain_string) {
            return Json(content);
        }
        throw UsageError(std::string("argument is not valid JSON: ") + e.what());
    }
}

Json column_list(const std::string& text) {
    const auto trimmed = text.find_first_not_of(' ');
    if (trimmed != std::string::npos && (text[trimmed] == '[' || text[trimmed] == '@')) {
        return json_argument(text, false);
    }
    Json list = Json::array();
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        list.push_back(item);
    }
    return list;
}

std::string format_number(const Json& v) {
    if (v.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6g", v.get<double>());
        return buf;
    }
    if (v.is_null()) {
        return "NA";
    }
    if (v.is_string()) {
        return v.get<std::string>();
    }
    return v.dump();
}

void print_grid(std::ostream& out, const std::vector<std::string>& header,
                const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width(header.size());
    for (std::size_t j = 0; j < header.size(); ++j) {
        width[j] = header[j].size();
        for (const auto& r : rows) {
            width[j] = std::max(width[j], r[j].size());
        }
    }
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
            out << (j ? "  " : "") << cells[j] << std::string(width[j] - cells[j].size(), ' ');
        }
        out << '\n';
    };
    line(header);
    std::vector<std::string> rule;
    for (auto w : width) {
        rule.emplace_back(w, '-');
    }
    line(rule);
    for (const auto& r : rows) {
        line(r);
    }
}

void print_object_grid(std::ostream& out, const Json& items) {
    if (items.empty()) {
        out << "(none)\n";
        return;
    }
    std::vector<std::string> header;
    for (const char* key : {"name", "level", "lag"}) {
        if (items.front().contains(key)) {
            header.emplace_back(key);
        }
    }
    for (const auto& [k, v] : items.front().items()) {
        if (!v.is_structured() && std::find(header.begin(), header.end(), k) == header.end()) {
            header.push_back(k);
        }
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& item : items) {
        std::vector<std::string> r;
        for (const auto& k : header) {
            r.push_back(item.contains(k) ? format_number(item[k]) : "");
        }
        rows.push_back(std::move(r));
    }
    print_grid(out, header, rows);
}

void print_scalars(std::ostream& out, const Json& object, const std::string& prefix = "") {
    for (const auto& [k, v] : object.items()) {
        if (v.is_object()) {
            print_scalars(out, v, prefix + k + ".");
        } else if (v.is_array()) {
            if (v.empty() || !v.front().is_structured()) {
                out << prefix << k << ": ";
                for (std::size_t i = 0; i < v.size(); ++i) {
                    out << (i ? ", " : "") << format_number(v[i]);
                }
                out << '\n';
            }
        } else {
            out << prefix << k << ": " << format_number(v) << '\n';
        }
    }
}

void print_table(std::ostream& out, const Json& result) {
    if (result.contains("rows") && result.contains("columns")) {
        std::vector<std::string> header;
        for (const auto& c : result["columns"]) {
            header.push_back(c["name"].get<std::string>());
        }
        std::vector<std::vector<std::string>> rows;
        for (const auto& row : result["rows"]) {
            std::vector<std::string> r;
            for (const auto& cell : row) {
                r.push_back(format_number(cell));
            }
            rows.push_back(std::move(r));
        }
        print_grid(out, header, rows);
        return;
    }
    if (result.contains("point") && result.contains("intervals")) {
        std::vector<std::string> header{"time", "point", "std_error"};
        for (const auto& i : result["intervals"]) {
            const auto pct = std::to_string(static_cast<int>(std::lround(i["level"].get<double>() * 100)));
            header.push_back("lo" + pct);
            header.push_back("hi" + pct);
        }
        std::vector<std::vector<std::string>> rows;
        for (std::size_t t = 0; t < result["point"].size(); ++t) {
            std::vector<std::string> r{result["times"][t].get<std::string>(), format_number(result["point"][t]),
                                       format_number(result["std_error"][t])};
            for (const auto& i : result["intervals"]) {
                r.push_back(format_number(i["lower"][t]));
                r.push_back(format_number(i["upper"][t]));
            }
            rows.push_back(std::move(r));
        }
        print_grid(out, header, rows);
        return;
    }
    if (result.contains("edges") && result.contains("counts")) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t b = 0; b < result["counts"].size(); ++b) {
            rows.push_back({format_number(result["edges"][b]), format_number(result["edges"][b + 1]),
                            format_number(result["counts"][b])});
        }
        print_grid(out, {"from", "to", "count"}, rows);
        return;
    }
    if (result.contains("times") && result.contains("values")) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t t = 0; t < result["values"].size(); ++t) {
            rows.push_back({result["times"][t].get<std::string>(), format_number(result["values"][t])});
        }
        if (result.contains("reference_line") && !result["reference_line"].is_null()) {
            out << "mean: " << format_number(result["reference_line"]) << '\n';
        }
        print_grid(out, {"time", result.value("label", std::string("value"))}, rows);
        return;
    }
    if (result.contains("residuals")) {
        Json shown = result;
        shown.erase("residuals");
        print_scalars(out, shown);
        return;
    }
    if (result.is_array()) {
        print_object_grid(out, result);
        return;
    }
    print_scalars(out, result);
    for (const auto& [k, v] : result.items()) {
        if (v.is_array() && !v.empty() && v.front().is_object()) {
            out << '\n';
            print_object_grid(out, v);
        }
    }
}

struct Options {
    std::string input;
    std::string output = "json";
    std::string delimiter = ",";
    bool no_header = false;
    std::vector<std::string> na_tokens;

    std::string column;
    std::string columns;
    std::string predicate;
    std::string spec;
    std::string series;
    std::string value_col;
    std::string kind = "scatter";
    std::optional<int> frequency;
    std::optional<long long> bins;
    std::optional<long long> max_lag;
    std::optional<long long> fitdf;
    std::optional<double> alpha;
    std::optional<long long> max_d;
    std::optional<long long> lag;
    std::optional<long long> order;
    std::optional<long long> horizon;
    std::vector<double> levels;

    int port = 8080;
    std::string host;
    std::string data_dir;
    std::optional<std::size_t> max_upload;
};

Table load_table(const Options& o) {
    ParseOptions options;
    const std::string delimiter = o.delimiter == "\\t" || o.delimiter == "tab" ? "\t" : o.delimiter;
    if (delimiter.size() != 1) {
        throw UsageError("--delimiter must be a single character");
    }
    options.delimiter = delimiter[0];
    options.has_header = !o.no_header;
    if (!o.na_tokens.empty()) {
        options.na_tokens = {o.na_tokens.begin(), o.na_tokens.end()};
    }
    std::string name = std::filesystem::path(o.input).filename().string();
    return parse_csv(read_file(o.input), options, name.empty() ? "data" : name);
}

Json series_request(const Options& o) {
    Json request = Json::object();
    if (!o.series.empty()) {
        request = json_argument(o.series, false);
        if (!request.is_object()) {
            throw UsageError("--series must be a JSON object");
        }
    }
    if (!o.value_col.empty()) {
        request["value_col"] = o.value_col;
    }
    if (o.frequency) {
        request["frequency"] = *o.frequency;
    }
    if (!o.spec.empty()) {
        request["spec"] = json_argument(o.spec, true);
    }
    return request;
}

/// Request body and service operation for one subcommand; mirrors the API payloads exactly.
std::pair<std::string, Json> build_request(const std::string& command, const Options& o) {
    auto need = [&](const std::string& value, const char* flag) {
        if (value.empty()) {
            throw UsageError(command + " requires " + flag);
        }
    };
    if (command == "schema") {
        return {"schema", Json::object()};
    }
    if (command == "summary" || command == "counts") {
        need(o.column, "--column");
        return {command == "summary" ? "summary" : "value_counts", {{"column", o.column}}};
    }
    if (command == "filter") {
        need(o.predicate, "--predicate");
        return {"filter", {{"predicate", json_argument(o.predicate, false)}}};
    }
    if (command == "select") {
        need(o.columns, "--columns");
        return {"select", {{"columns", column_list(o.columns)}}};
    }
    if (command == "aggregate") {
        need(o.spec, "--spec");
        return {"aggregate", json_argument(o.spec, false)};
    }
    if (command == "hist") {
        need(o.column, "--column");
        Json r{{"kind", "histogram"}, {"columns", Json::array({o.column})}};
        if (o.bins) {
            r["bins"] = *o.bins;
        }
        return {"chart", r};
    }
    if (command == "plot") {
        Json columns = o.columns.empty() ? Json::array() : column_list(o.columns);
        if (columns.empty() && !o.column.empty()) {
            columns.push_back(o.column);
        }
        if (columns.empty()) {
            throw UsageError("plot requires --columns");
        }
        return {"chart", {{"kind", o.kind}, {"columns", columns}}};
    }
    auto request = series_request(o);
    if (command == "ljungbox") {
        if (o.max_lag) {
            request["max_lag"] = *o.max_lag;
        }
        if (o.fitdf) {
            request["fitdf"] = *o.fitdf;
        }
        return {"ljung_box", request};
    }
    if (command == "ndiffs") {
        if (o.alpha) {
            request["alpha"] = *o.alpha;
        }
        if (o.max_d) {
            request["max_d"] = *o.max_d;
        }
        return {"ndiffs", request};
    }
    if (command == "diff") {
        if (o.lag) {
            request["lag"] = *o.lag;
        }
        if (o.order) {
            request["order"] = *o.order;
        }
        return {"diff", request};
    }
    if (command == "fit") {
        return {"fit", request};
    }
    if (command == "forecast") {
        if (!o.horizon) {
            throw UsageError("forecast requires --horizon");
        }
        request["horizon"] = *o.horizon;
        if (!o.levels.empty()) {
            request["levels"] = o.levels;
        }
        return {"forecast", request};
    }
    throw UsageError("unknown subcommand '" + command + "'");
}

std::string svg_for(const std::string& command, const Table& table, const std::string& operation,
                    const Json& request) {
    if (command == "hist" || command == "plot") {
        const auto kind = request.at("kind").get<std::string>();
        const auto columns = request.at("columns").get<std::vector<std::string>>();
        ops::run(operation, table, request);  // validates the request with the same errors as the API
        if (kind == "histogram") {
            std::optional<std::size_t> bins;
            if (request.contains("bins")) {
                bins = request["bins"].get<std::size_t>();
            }
            return render_svg(histogram(table, columns.at(0), bins));
        }
        if (kind == "bar") {
            return render_svg(value_counts(table, columns.at(0)));
        }
        return render_svg(xy_series(table, columns.at(0), columns.at(1), kind == "line" ? XYKind::line : XYKind::scatter));
    }
    if (command == "counts") {
        return render_svg(value_counts(table, request.at("column").get<std::string>()));
    }
    if (command == "diff") {
        const auto spec = ops::series_spec_from_request(table, request);
        const auto series = ts::build_series(table, spec);
        const auto lag = request.value("lag", std::size_t{1});
        const auto order = request.value("order", std::size_t{1});
        ops::run(operation, table, request);
        return render_svg(ts::plot_data(ts::difference(series, lag, order), spec.value_col, true));
    }
    throw UsageError("svg output is available for hist, plot, counts and diff");
}

int serve(const Options& o, std::ostream& err) {
    service::Config base;
    auto config = service::Config::from_environment(base);
    if (!o.data_dir.empty()) {
        config.data_dir = o.data_dir;
    }
    if (!o.host.empty()) {
        config.host = o.host;
    }
    if (o.port != 0) {
        config.port = o.port;
    }
    if (o.max_upload) {
        config.max_upload_bytes = *o.max_upload;
    }
    service::Service svc(config);
    err << "serving " << config.data_dir.string() << " on http://" << config.host << ':' << config.port << std::endl;
    if (!svc.listen()) {
        err << "error: cannot listen on " << config.host << ':' << config.port << '\n';
        return 1;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Tabular data exploration and ARIMA forecasting", "explore"};
    app.require_subcommand(1);
    Options o;

    auto add_input = [&](CLI::App* sub) {
        sub->add_option("-i,--input", o.input, "CSV file")->required();
        sub->add_option("--delimiter", o.delimiter, "Field delimiter (use \\t for tab)");
        sub->add_flag("--no-header", o.no_header, "First row holds data, not names");
        sub->add_option("--na", o.na_tokens, "Tokens read as missing (default: empty, NA, NaN)");
        sub->add_option("-o,--output", o.output, "Output format")->check(CLI::IsMember({"json", "table", "svg"}));
    };
    auto add_series = [&](CLI::App* sub) {
        sub->add_option("--series", o.series, "Series spec as JSON or @file");
        sub->add_option("--value-col", o.value_col, "Value column (time layout inferred)");
        sub->add_option("--frequency", o.frequency, "Observations per year (1, 4 or 12)");
    };

    std::map<std::string, CLI::App*> subs;
    auto sub = [&](const std::string& name, const std::string& help) {
        auto* s = app.add_subcommand(name, help);
        subs[name] = s;
        return s;
    };

    auto* s = sub("schema", "Column types, missing and distinct counts");
    add_input(s);
    s = sub("summary", "Descriptive statistics of a numeric column");
    add_input(s);
    s->add_option("-c,--column", o.column)->required();
    s = sub("counts", "Frequency table of a column");
    add_input(s);
    s->add_option("-c,--column", o.column)->required();
    s = sub("filter", "Rows matching a predicate");
    add_input(s);
    s->add_option("-p,--predicate", o.predicate, "Predicate as JSON or @file")->required();
    s = sub("select", "Columns in the given order");
    add_input(s);
    s->add_option("--columns", o.columns, "Comma-separated names or a JSON array")->required();
    s = sub("aggregate", "Grouped aggregates");
    add_input(s);
    s->add_option("-s,--spec", o.spec, "Aggregation spec as JSON or @file")->required();
    s = sub("hist", "Histogram of a numeric column");
    add_input(s);
    s->add_option("-c,--column", o.column)->required();
    s->add_option("--bins", o.bins, "Bin count (default: Sturges)");
    s = sub("plot", "Scatter, line or bar chart data");
    add_input(s);
    s->add_option("--kind", o.kind)->check(CLI::IsMember({"scatter", "line", "bar"}));
    s->add_option("--columns", o.columns, "x,y for scatter and line; one column for bar");
    s->add_option("-c,--column", o.column, "Column for bar charts");
    s = sub("ljungbox", "Ljung-Box statistics of a series or of model residuals");
    add_input(s);
    add_series(s);
    s->add_option("--max-lag", o.max_lag);
    s->add_option("--fitdf", o.fitdf);
    s->add_option("-s,--spec", o.spec, "Fit this model first and test its residuals");
    s = sub("ndiffs", "Number of differences suggested by KPSS");
    add_input(s);
    add_series(s);
    s->add_option("--alpha", o.alpha);
    s->add_option("--max-d", o.max_d);
    s = sub("diff", "Differenced series with its mean");
    add_input(s);
    add_series(s);
    s->add_option("--lag", o.lag);
    s->add_option("--order", o.order);
    s = sub("fit", "Fit an ARIMA model (automatic selection without --spec)");
    add_input(s);
    add_series(s);
    s->add_option("-s,--spec", o.spec, "Orders as p,d,q[,P,D,Q] or JSON");
    s = sub("forecast", "Forecast with prediction intervals");
    add_input(s);
    add_series(s);
    s->add_option("-s,--spec", o.spec, "Orders as p,d,q[,P,D,Q] or JSON");
    s->add_option("-H,--horizon", o.horizon)->required();
    s->add_option("--levels", o.levels, "Interval levels (default 0.8 0.95)");
    s = sub("serve", "Start the HTTP service");
    o.port = 0;
    s->add_option("--port", o.port);
    s->add_option("--host", o.host);
    s->add_option("--data-dir", o.data_dir);
    s->add_option("--max-upload", o.max_upload, "Upload size limit in bytes");

    std::vector<const char*> argv;
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        if (dynamic_cast<const CLI::RequiredError*>(&e) == nullptr || app.get_subcommands().empty()) {
            err << app.help();
        }
        return 1;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "serve") {
            return serve(o, err);
        }
        const auto [operation, request] = build_request(command, o);
        const auto table = load_table(o);
        if (o.output == "svg") {
            out << svg_for(command, table, operation, request);
            return 0;
        }
        const auto result = ops::run(operation, table, request);
        if (o.output == "table") {
            print_table(out, result);
        } else {
            out << result.dump(2) << '\n';
        }
        return 0;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what();
        if (!e.detail().is_null()) {
            err << ' ' << e.detail().dump();
        }
        err << '\n';
        return http_status(e.code()) >= 500 ? 2 : 1;
    } catch (const std::exception& e) {
        err << "error: internal_error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace explore::cli
