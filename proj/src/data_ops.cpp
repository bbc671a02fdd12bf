#include "explore/data_ops.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_set>

namespace explore {

namespace {

Error mismatch(const std::string& message) { return Error(ErrorCode::type_mismatch, message); }

// Operand coerced to the column's domain, or nullopt when incompatible.
std::optional<Value> coerce_operand(DType dtype, const Value& operand) {
    switch (dtype) {
        case DType::integer:
        case DType::real:
            if (as_double(operand)) {
                return operand;
            }
            return std::nullopt;
        case DType::boolean:
            if (std::holds_alternative<bool>(operand)) {
                return operand;
            }
            return std::nullopt;
        case DType::text:
            if (std::holds_alternative<std::string>(operand)) {
                return operand;
            }
            return std::nullopt;
        case DType::date:
            if (std::holds_alternative<Date>(operand)) {
                return operand;
            }
            if (const auto* s = std::get_if<std::string>(&operand)) {
                if (auto d = parse_date(*s)) {
                    return Value{*d};
                }
            }
            return std::nullopt;
    }
    return std::nullopt;
}

void validate_leaf(const Table& table, const Predicate& p) {
    const auto& col = table.column(p.column);
    const auto dtype = col.dtype();
    switch (p.op) {
        case Comparator::is_missing:
        case Comparator::not_missing: return;
        case Comparator::contains:
            if (dtype != DType::text) {
                throw mismatch("'contains' requires a text column; '" + p.column + "' is " +
                               std::string(to_string(dtype)));
            }
            break;
        case Comparator::lt:
        case Comparator::le:
        case Comparator::gt:
        case Comparator::ge:
            if (!is_numeric(dtype) && dtype != DType::date) {
                throw mismatch("ordering comparison requires an integer, real or date column; '" + p.column +
                               "' is " + std::string(to_string(dtype)));
            }
            break;
        case Comparator::eq:
        case Comparator::ne: break;
    }
    if (!coerce_operand(dtype, p.operand)) {
        throw mismatch("operand for '" + p.column + "' is not compatible with " + std::string(to_string(dtype)));
    }
}

// Three-way compare of a non-missing cell against a coerced operand.
int compare_cell(const Value& cell, const Value& operand) {
    if (const auto* a = std::get_if<std::int64_t>(&cell)) {
        if (const auto* b = std::get_if<std::int64_t>(&operand)) {
            return (*a > *b) - (*a < *b);
        }
    }
    if (auto a = as_double(cell)) {
        const double b = *as_double(operand);
        return (*a > b) - (*a < b);
    }
    if (cell < operand) {
        return -1;
    }
    return operand < cell ? 1 : 0;
}

bool evaluate_leaf(const Column& col, const Predicate& p, const Value& operand, std::size_t row) {
    const auto& cell = col[row];
    if (p.op == Comparator::is_missing) {
        return is_missing(cell);
    }
    if (p.op == Comparator::not_missing) {
        return !is_missing(cell);
    }
    if (is_missing(cell)) {
        return false;
    }
    if (p.op == Comparator::contains) {
        return std::get<std::string>(cell).find(std::get<std::string>(operand)) != std::string::npos;
    }
    const int c = compare_cell(cell, operand);
    switch (p.op) {
        case Comparator::eq: return c == 0;
        case Comparator::ne: return c != 0;
        case Comparator::lt: return c < 0;
        case Comparator::le: return c <= 0;
        case Comparator::gt: return c > 0;
        case Comparator::ge: return c >= 0;
        default: return false;
    }
}

std::vector<double> numeric_values(const Column& col, const std::vector<std::size_t>& rows) {
    std::vector<double> out;
    out.reserve(rows.size());
    for (auto r : rows) {
        if (auto v = as_double(col[r])) {
            out.push_back(*v);
        }
    }
    return out;
}

DType measure_dtype(AggFunction fn, DType source) {
    switch (fn) {
        case AggFunction::count: return DType::integer;
        case AggFunction::sum:
        case AggFunction::min:
        case AggFunction::max: return source;
        default: return DType::real;
    }
}

Value aggregate(const Column& col, AggFunction fn, const std::vector<std::size_t>& rows) {
    if (fn == AggFunction::count) {
        return static_cast<std::int64_t>(
            std::count_if(rows.begin(), rows.end(), [&](std::size_t r) { return !is_missing(col[r]); }));
    }
    if (col.dtype() == DType::integer && (fn == AggFunction::sum || fn == AggFunction::min || fn == AggFunction::max)) {
        std::vector<std::int64_t> xs;
        for (auto r : rows) {
            if (const auto* v = std::get_if<std::int64_t>(&col[r])) {
                xs.push_back(*v);
            }
        }
        if (fn == AggFunction::sum) {
            return std::accumulate(xs.begin(), xs.end(), std::int64_t{0});
        }
        if (xs.empty()) {
            return {};
        }
        return fn == AggFunction::min ? *std::min_element(xs.begin(), xs.end())
                                      : *std::max_element(xs.begin(), xs.end());
    }
    auto xs = numeric_values(col, rows);
    switch (fn) {
        case AggFunction::sum: return std::accumulate(xs.begin(), xs.end(), 0.0);
        case AggFunction::mean: return xs.empty() ? Value{} : Value{mean_of(xs)};
        case AggFunction::min: return xs.empty() ? Value{} : Value{*std::min_element(xs.begin(), xs.end())};
        case AggFunction::max: return xs.empty() ? Value{} : Value{*std::max_element(xs.begin(), xs.end())};
        case AggFunction::median: {
            if (xs.empty()) {
                return {};
            }
            std::sort(xs.begin(), xs.end());
            return quantile_sorted(xs, 0.5);
        }
        case AggFunction::sd: {
            auto sd = sample_sd(xs);
            return sd ? Value{*sd} : Value{};
        }
        default: return {};
    }
}

}  // namespace

std::string_view to_string(Comparator op) {
    switch (op) {
        case Comparator::eq: return "==";
        case Comparator::ne: return "!=";
        case Comparator::lt: return "<";
        case Comparator::le: return "<=";
        case Comparator::gt: return ">";
        case Comparator::ge: return ">=";
        case Comparator::contains: return "contains";
        case Comparator::is_missing: return "is_missing";
        case Comparator::not_missing: return "not_missing";
    }
    return "==";
}

std::optional<Comparator> parse_comparator(std::string_view text) {
    for (auto op : {Comparator::eq, Comparator::ne, Comparator::lt, Comparator::le, Comparator::gt, Comparator::ge,
                    Comparator::contains, Comparator::is_missing, Comparator::not_missing}) {
        if (to_string(op) == text) {
            return op;
        }
    }
    return std::nullopt;
}

Predicate Predicate::compare(std::string column, Comparator op, Value operand) {
    Predicate p;
    p.kind = Kind::compare;
    p.column = std::move(column);
    p.op = op;
    p.operand = std::move(operand);
    return p;
}

Predicate Predicate::all_of(std::vector<Predicate> children) {
    Predicate p;
    p.kind = Kind::all_of;
    p.children = std::move(children);
    return p;
}

Predicate Predicate::any_of(std::vector<Predicate> children) {
    Predicate p;
    p.kind = Kind::any_of;
    p.children = std::move(children);
    return p;
}

Predicate Predicate::negate(Predicate child) {
    Predicate p;
    p.kind = Kind::negate;
    p.children.push_back(std::move(child));
    return p;
}

std::string_view to_string(AggFunction fn) {
    switch (fn) {
        case AggFunction::sum: return "sum";
        case AggFunction::mean: return "mean";
        case AggFunction::count: return "count";
        case AggFunction::min: return "min";
        case AggFunction::max: return "max";
        case AggFunction::median: return "median";
        case AggFunction::sd: return "sd";
    }
    return "count";
}

std::optional<AggFunction> parse_agg_function(std::string_view text) {
    for (auto fn : {AggFunction::sum, AggFunction::mean, AggFunction::count, AggFunction::min, AggFunction::max,
                    AggFunction::median, AggFunction::sd}) {
        if (to_string(fn) == text) {
            return fn;
        }
    }
    return std::nullopt;
}

void validate_predicate(const Table& table, const Predicate& predicate) {
    switch (predicate.kind) {
        case Predicate::Kind::compare: validate_leaf(table, predicate); break;
        case Predicate::Kind::negate:
            if (predicate.children.size() != 1) {
                throw Error(ErrorCode::invalid_spec, "'not' takes exactly one operand");
            }
            [[fallthrough]];
        case Predicate::Kind::all_of:
        case Predicate::Kind::any_of:
            for (const auto& c : predicate.children) {
                validate_predicate(table, c);
            }
            break;
    }
}

bool evaluate(const Table& table, const Predicate& predicate, std::size_t row) {
    switch (predicate.kind) {
        case Predicate::Kind::compare: {
            const auto& col = table.column(predicate.column);
            const auto operand = coerce_operand(col.dtype(), predicate.operand).value_or(Value{});
            return evaluate_leaf(col, predicate, operand, row);
        }
        case Predicate::Kind::all_of:
            return std::all_of(predicate.children.begin(), predicate.children.end(),
                               [&](const Predicate& c) { return evaluate(table, c, row); });
        case Predicate::Kind::any_of:
            return std::any_of(predicate.children.begin(), predicate.children.end(),
                               [&](const Predicate& c) { return evaluate(table, c, row); });
        case Predicate::Kind::negate: return !evaluate(table, predicate.children.front(), row);
    }
    return false;
}

Table filter_rows(const Table& table, const Predicate& predicate) {
    validate_predicate(table, predicate);
    std::vector<std::size_t> keep;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        if (evaluate(table, predicate, r)) {
            keep.push_back(r);
        }
    }
    return table.take_rows(keep);
}

Table select_columns(const Table& table, const std::vector<std::string>& names) {
    std::unordered_set<std::string> seen;
    std::vector<Column> out;
    for (const auto& n : names) {
        if (!seen.insert(n).second) {
            throw Error(ErrorCode::duplicate_selection, "column '" + n + "' selected more than once", {{"column", n}});
        }
        out.push_back(table.column(n));
    }
    if (out.empty()) {
        return Table(table.name(), {});
    }
    return Table(table.name(), std::move(out));
}

Table group_aggregate(const Table& table, const AggregationSpec& spec) {
    std::vector<const Column*> keys;
    for (const auto& k : spec.group_keys) {
        keys.push_back(&table.column(k));
    }
    std::unordered_set<std::string> out_names(spec.group_keys.begin(), spec.group_keys.end());
    if (out_names.size() != spec.group_keys.size()) {
        throw Error(ErrorCode::invalid_spec, "group keys must be distinct");
    }
    for (const auto& m : spec.measures) {
        const auto& col = table.column(m.column);
        if (std::find(spec.group_keys.begin(), spec.group_keys.end(), m.column) != spec.group_keys.end()) {
            throw Error(ErrorCode::invalid_spec, "column '" + m.column + "' is both a group key and a measure",
                        {{"column", m.column}});
        }
        if (m.function != AggFunction::count && !is_numeric(col.dtype())) {
            throw Error(ErrorCode::type_mismatch,
                        std::string(to_string(m.function)) + " requires a numeric column; '" + m.column + "' is " +
                            std::string(to_string(col.dtype())),
                        {{"column", m.column}});
        }
        const auto out_name = std::string(to_string(m.function)) + "_" + m.column;
        if (!out_names.insert(out_name).second) {
            throw Error(ErrorCode::invalid_spec, "duplicate output column '" + out_name + "'");
        }
    }

    std::map<std::vector<Value>, std::size_t> group_of;
    std::vector<std::vector<std::size_t>> members;
    std::vector<std::vector<Value>> group_keys;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::vector<Value> key;
        key.reserve(keys.size());
        for (const auto* k : keys) {
            key.push_back((*k)[r]);
        }
        auto [it, inserted] = group_of.try_emplace(key, members.size());
        if (inserted) {
            members.emplace_back();
            group_keys.push_back(std::move(key));
        }
        members[it->second].push_back(r);
    }

    std::vector<Column> out;
    for (std::size_t k = 0; k < keys.size(); ++k) {
        std::vector<Value> cells;
        for (const auto& gk : group_keys) {
            cells.push_back(gk[k]);
        }
        out.emplace_back(keys[k]->name(), keys[k]->dtype(), std::move(cells));
    }
    for (const auto& m : spec.measures) {
        const auto& col = table.column(m.column);
        std::vector<Value> cells;
        for (const auto& rows : members) {
            cells.push_back(aggregate(col, m.function, rows));
        }
        out.emplace_back(std::string(to_string(m.function)) + "_" + m.column, measure_dtype(m.function, col.dtype()),
                         std::move(cells));
    }
    return Table(table.name(), std::move(out));
}

double quantile_sorted(std::span<const double> sorted, double p) {
    const auto n = sorted.size();
    const double h = static_cast<double>(n - 1) * p;
    const auto k = static_cast<std::size_t>(std::floor(h));
    const double g = h - static_cast<double>(k);
    if (k + 1 >= n) {
        return sorted[n - 1];
    }
    return sorted[k] + g * (sorted[k + 1] - sorted[k]);
}

double mean_of(std::span<const double> values) {
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

std::optional<double> sample_sd(std::span<const double> values) {
    if (values.size() < 2) {
        return std::nullopt;
    }
    const double m = mean_of(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

ColumnSummary summarize_column(const Table& table, const std::string& name) {
    const auto& col = table.column(name);
    if (!is_numeric(col.dtype())) {
        throw Error(ErrorCode::non_numeric_column,
                    "column '" + name + "' is " + std::string(to_string(col.dtype())) + ", not numeric",
                    {{"column", name}});
    }
    std::vector<double> xs;
    for (const auto& v : col.cells()) {
        if (auto d = as_double(v)) {
            xs.push_back(*d);
        }
    }
    if (xs.empty()) {
        throw Error(ErrorCode::all_missing, "column '" + name + "' has no non-missing values", {{"column", name}});
    }
    ColumnSummary s;
    s.n = col.size();
    s.n_missing = col.size() - xs.size();
    std::sort(xs.begin(), xs.end());
    s.mean = mean_of(xs);
    s.sd = sample_sd(xs);
    s.min = xs.front();
    s.max = xs.back();
    s.q1 = quantile_sorted(xs, 0.25);
    s.median = quantile_sorted(xs, 0.5);
    s.q3 = quantile_sorted(xs, 0.75);
    return s;
}

FrequencyTable value_counts(const Table& table, const std::string& name) {
    const auto& col = table.column(name);
    std::map<std::string, std::size_t> counts;
    for (const auto& v : col.cells()) {
        if (!is_missing(v)) {
            ++counts[format_value(v)];
        }
    }
    FrequencyTable out;
    for (auto& [level, count] : counts) {
        out.entries.push_back({level, count});
    }
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const FrequencyEntry& a, const FrequencyEntry& b) { return a.count > b.count; });
    return out;
}

}  // namespace explore
