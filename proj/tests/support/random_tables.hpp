#pragma once

// Random tables, predicates and aggregation specs, plus row-by-row scan oracles for the data engine.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "explore/data_ops.hpp"
#include "explore/table.hpp"
#include "oracles.hpp"

namespace oracle {

inline const std::vector<std::string>& text_pool() {
    static const std::vector<std::string> pool{"alpha", "beta",     "gamma", "delta, inc", "say \"hi\"",
                                               "multi\nline", "ümlaut", "x",     "beta2",      "  padded "};
    return pool;
}

inline explore::Value random_cell(Rng& rng, explore::DType dtype) {
    using explore::DType;
    switch (dtype) {
        case DType::integer:
            return static_cast<std::int64_t>(std::uniform_int_distribution<int>(-20, 20)(rng));
        case DType::real: {
            // Mix of short decimals (ties and groups) and full-precision doubles.
            if (std::bernoulli_distribution(0.5)(rng)) {
                return std::uniform_int_distribution<int>(-40, 40)(rng) / 4.0;
            }
            return std::normal_distribution<double>(0.0, 1e3)(rng);
        }
        case DType::boolean:
            return std::bernoulli_distribution(0.5)(rng);
        case DType::text: {
            const auto& pool = text_pool();
            return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
        }
        case DType::date:
            return explore::Date{std::uniform_int_distribution<int>(1999, 2001)(rng),
                                 std::uniform_int_distribution<int>(1, 12)(rng),
                                 std::uniform_int_distribution<int>(1, 28)(rng)};
    }
    return {};
}

/// Up to max_rows x max_cols, mixed dtypes, about `missing` share of missing cells. Every column
/// keeps at least one non-missing cell so the dtype survives a CSV round trip.
inline explore::Table random_table(Rng& rng, std::size_t max_rows = 50, std::size_t max_cols = 8,
                                   double missing = 0.10) {
    using explore::DType;
    const auto n_rows = std::uniform_int_distribution<std::size_t>(1, max_rows)(rng);
    const auto n_cols = std::uniform_int_distribution<std::size_t>(1, max_cols)(rng);
    static const DType dtypes[] = {DType::integer, DType::real, DType::boolean, DType::text, DType::date};
    std::bernoulli_distribution is_missing(missing);
    std::vector<explore::Column> columns;
    for (std::size_t j = 0; j < n_cols; ++j) {
        const auto dtype = dtypes[std::uniform_int_distribution<int>(0, 4)(rng)];
        std::vector<explore::Value> cells;
        for (std::size_t r = 0; r < n_rows; ++r) {
            cells.push_back(is_missing(rng) ? explore::Value{} : random_cell(rng, dtype));
        }
        if (std::all_of(cells.begin(), cells.end(), [](const auto& v) { return explore::is_missing(v); })) {
            cells[0] = random_cell(rng, dtype);
        }
        columns.emplace_back("c" + std::to_string(j), dtype, std::move(cells));
    }
    return explore::Table("random", std::move(columns));
}

inline explore::Predicate random_leaf(Rng& rng, const explore::Table& t) {
    using explore::Comparator;
    using explore::DType;
    const auto& col = t.columns()[std::uniform_int_distribution<std::size_t>(0, t.n_columns() - 1)(rng)];
    std::vector<Comparator> ops{Comparator::eq, Comparator::ne, Comparator::is_missing, Comparator::not_missing};
    if (explore::is_numeric(col.dtype()) || col.dtype() == DType::date) {
        ops.insert(ops.end(), {Comparator::lt, Comparator::le, Comparator::gt, Comparator::ge});
    }
    if (col.dtype() == DType::text) {
        ops.push_back(Comparator::contains);
    }
    const auto op = ops[std::uniform_int_distribution<std::size_t>(0, ops.size() - 1)(rng)];
    explore::Value operand;
    if (op != Comparator::is_missing && op != Comparator::not_missing) {
        // Prefer operands that occur in the column so equality tests hit.
        const auto& cell = col[std::uniform_int_distribution<std::size_t>(0, col.size() - 1)(rng)];
        operand = explore::is_missing(cell) ? random_cell(rng, col.dtype()) : cell;
        if (col.dtype() == DType::integer && std::bernoulli_distribution(0.3)(rng)) {
            operand = static_cast<double>(std::get<std::int64_t>(operand)) + 0.5;
        } else if (col.dtype() == DType::date && std::bernoulli_distribution(0.5)(rng)) {
            operand = explore::format_date(std::get<explore::Date>(operand));
        } else if (op == Comparator::contains) {
            const auto& s = std::get<std::string>(operand);
            operand = s.substr(0, std::min<std::size_t>(s.size(), 2));
        }
    }
    return explore::Predicate::compare(col.name(), op, operand);
}

inline explore::Predicate random_predicate(Rng& rng, const explore::Table& t, int depth = 2) {
    const int kind = depth == 0 ? 0 : std::uniform_int_distribution<int>(0, 3)(rng);
    switch (kind) {
        case 1:
        case 2: {
            std::vector<explore::Predicate> children;
            const int k = std::uniform_int_distribution<int>(1, 3)(rng);
            for (int i = 0; i < k; ++i) {
                children.push_back(random_predicate(rng, t, depth - 1));
            }
            return kind == 1 ? explore::Predicate::all_of(std::move(children))
                             : explore::Predicate::any_of(std::move(children));
        }
        case 3:
            return explore::Predicate::negate(random_predicate(rng, t, depth - 1));
        default:
            return random_leaf(rng, t);
    }
}

/// Keys from any columns, measures from the remaining ones (numeric only unless count).
inline explore::AggregationSpec random_aggregation(Rng& rng, const explore::Table& t) {
    explore::AggregationSpec spec;
    std::vector<std::size_t> order(t.n_columns());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const auto n_keys = std::uniform_int_distribution<std::size_t>(0, std::min<std::size_t>(2, order.size() - 1))(rng);
    for (std::size_t i = 0; i < n_keys; ++i) {
        spec.group_keys.push_back(t.columns()[order[i]].name());
    }
    using explore::AggFunction;
    const AggFunction all[] = {AggFunction::sum, AggFunction::mean,   AggFunction::count, AggFunction::min,
                               AggFunction::max, AggFunction::median, AggFunction::sd};
    for (std::size_t i = n_keys; i < order.size(); ++i) {
        const auto& col = t.columns()[order[i]];
        for (auto fn : all) {
            if (fn == AggFunction::count || explore::is_numeric(col.dtype())) {
                spec.measures.push_back({col.name(), fn});
            }
        }
    }
    return spec;
}

// ---------------------------------------------------------------------------------------------
// Scan oracles.

inline int scan_compare(const explore::Value& cell, const explore::Value& operand, explore::DType dtype) {
    using explore::DType;
    auto three = [](auto a, auto b) { return (a > b) - (a < b); };
    switch (dtype) {
        case DType::integer:
            if (std::holds_alternative<std::int64_t>(operand)) {
                return three(std::get<std::int64_t>(cell), std::get<std::int64_t>(operand));
            }
            return three(static_cast<double>(std::get<std::int64_t>(cell)), std::get<double>(operand));
        case DType::real:
            return three(std::get<double>(cell), std::holds_alternative<double>(operand)
                                                     ? std::get<double>(operand)
                                                     : static_cast<double>(std::get<std::int64_t>(operand)));
        case DType::boolean:
            return three(std::get<bool>(cell), std::get<bool>(operand));
        case DType::text:
            return three(std::get<std::string>(cell), std::get<std::string>(operand));
        case DType::date: {
            const auto& a = std::get<explore::Date>(cell);
            const auto b = std::holds_alternative<explore::Date>(operand)
                               ? std::get<explore::Date>(operand)
                               : *explore::parse_date(std::get<std::string>(operand));
            const long ka = a.year * 10000L + a.month * 100L + a.day;
            const long kb = b.year * 10000L + b.month * 100L + b.day;
            return three(ka, kb);
        }
    }
    return 0;
}

inline bool scan_evaluate(const explore::Table& t, const explore::Predicate& p, std::size_t row) {
    using K = explore::Predicate::Kind;
    using explore::Comparator;
    if (p.kind == K::all_of) {
        for (const auto& c : p.children) {
            if (!scan_evaluate(t, c, row)) {
                return false;
            }
        }
        return true;
    }
    if (p.kind == K::any_of) {
        for (const auto& c : p.children) {
            if (scan_evaluate(t, c, row)) {
                return true;
            }
        }
        return false;
    }
    if (p.kind == K::negate) {
        return !scan_evaluate(t, p.children[0], row);
    }
    std::size_t j = 0;
    while (t.columns()[j].name() != p.column) {
        ++j;
    }
    const auto& col = t.columns()[j];
    const auto& cell = col.cells()[row];
    const bool missing = std::holds_alternative<std::monostate>(cell);
    switch (p.op) {
        case Comparator::is_missing: return missing;
        case Comparator::not_missing: return !missing;
        default: break;
    }
    if (missing) {
        return false;
    }
    if (p.op == Comparator::contains) {
        return std::get<std::string>(cell).find(std::get<std::string>(p.operand)) != std::string::npos;
    }
    const int c = scan_compare(cell, p.operand, col.dtype());
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

/// Row-by-row filter: copies matching rows cell by cell.
inline explore::Table scan_filter(const explore::Table& t, const explore::Predicate& p) {
    std::vector<std::vector<explore::Value>> cells(t.n_columns());
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        if (scan_evaluate(t, p, r)) {
            for (std::size_t j = 0; j < t.n_columns(); ++j) {
                cells[j].push_back(t.columns()[j].cells()[r]);
            }
        }
    }
    std::vector<explore::Column> cols;
    for (std::size_t j = 0; j < t.n_columns(); ++j) {
        cols.emplace_back(t.columns()[j].name(), t.columns()[j].dtype(), std::move(cells[j]));
    }
    return explore::Table(t.name(), std::move(cols));
}

inline explore::Table scan_select(const explore::Table& t, const std::vector<std::string>& names) {
    std::vector<explore::Column> cols;
    for (const auto& n : names) {
        for (const auto& c : t.columns()) {
            if (c.name() == n) {
                cols.push_back(c);
            }
        }
    }
    return explore::Table(t.name(), std::move(cols));
}

inline std::vector<double> numeric_cells(const explore::Column& col, const std::vector<std::size_t>& rows) {
    std::vector<double> xs;
    for (auto r : rows) {
        const auto& v = col.cells()[r];
        if (std::holds_alternative<std::int64_t>(v)) {
            xs.push_back(static_cast<double>(std::get<std::int64_t>(v)));
        } else if (std::holds_alternative<double>(v)) {
            xs.push_back(std::get<double>(v));
        }
    }
    return xs;
}

/// Nested-loop grouping: groups found by linear search over the distinct keys seen so far.
inline explore::Table scan_group(const explore::Table& t, const explore::AggregationSpec& spec) {
    using explore::AggFunction;
    using explore::DType;
    using explore::Value;
    auto col_of = [&](const std::string& name) -> const explore::Column& {
        for (const auto& c : t.columns()) {
            if (c.name() == name) {
                return c;
            }
        }
        throw std::logic_error("no column");
    };
    std::vector<std::vector<Value>> keys;
    std::vector<std::vector<std::size_t>> members;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::vector<Value> key;
        for (const auto& k : spec.group_keys) {
            key.push_back(col_of(k).cells()[r]);
        }
        std::size_t g = 0;
        while (g < keys.size() && !(keys[g] == key)) {
            ++g;
        }
        if (g == keys.size()) {
            keys.push_back(key);
            members.emplace_back();
        }
        members[g].push_back(r);
    }
    std::vector<explore::Column> out;
    for (std::size_t k = 0; k < spec.group_keys.size(); ++k) {
        std::vector<Value> cells;
        for (const auto& key : keys) {
            cells.push_back(key[k]);
        }
        out.emplace_back(spec.group_keys[k], col_of(spec.group_keys[k]).dtype(), std::move(cells));
    }
    for (const auto& m : spec.measures) {
        const auto& col = col_of(m.column);
        const bool integer = col.dtype() == DType::integer;
        DType dtype = DType::real;
        std::vector<Value> cells;
        for (const auto& rows : members) {
            const auto xs = numeric_cells(col, rows);
            switch (m.function) {
                case AggFunction::count: {
                    std::int64_t n = 0;
                    for (auto r : rows) {
                        n += std::holds_alternative<std::monostate>(col.cells()[r]) ? 0 : 1;
                    }
                    dtype = DType::integer;
                    cells.emplace_back(n);
                    break;
                }
                case AggFunction::sum: {
                    dtype = col.dtype();
                    if (integer) {
                        std::int64_t s = 0;
                        for (double x : xs) {
                            s += static_cast<std::int64_t>(x);
                        }
                        cells.emplace_back(s);
                    } else {
                        double s = 0.0;
                        for (double x : xs) {
                            s += x;
                        }
                        cells.emplace_back(s);
                    }
                    break;
                }
                case AggFunction::min:
                case AggFunction::max: {
                    dtype = col.dtype();
                    if (xs.empty()) {
                        cells.emplace_back();
                        break;
                    }
                    double best = xs[0];
                    for (double x : xs) {
                        best = m.function == AggFunction::min ? std::min(best, x) : std::max(best, x);
                    }
                    cells.push_back(integer ? Value{static_cast<std::int64_t>(best)} : Value{best});
                    break;
                }
                case AggFunction::mean: {
                    if (xs.empty()) {
                        cells.emplace_back();
                        break;
                    }
                    double s = 0.0;
                    for (double x : xs) {
                        s += x;
                    }
                    cells.emplace_back(s / static_cast<double>(xs.size()));
                    break;
                }
                case AggFunction::median:
                    cells.push_back(xs.empty() ? Value{} : Value{quantile_type7(xs, 0.5)});
                    break;
                case AggFunction::sd: {
                    if (xs.size() < 2) {
                        cells.emplace_back();
                        break;
                    }
                    double s = 0.0;
                    for (double x : xs) {
                        s += x;
                    }
                    const double mean = s / static_cast<double>(xs.size());
                    double ss = 0.0;
                    for (double x : xs) {
                        ss += (x - mean) * (x - mean);
                    }
                    cells.emplace_back(std::sqrt(ss / static_cast<double>(xs.size() - 1)));
                    break;
                }
            }
        }
        out.emplace_back(std::string(explore::to_string(m.function)) + "_" + m.column, dtype, std::move(cells));
    }
    return explore::Table(t.name(), std::move(out));
}

/// Linear-scan counting, then sort by descending count and ascending level.
inline explore::FrequencyTable scan_value_counts(const explore::Column& col) {
    std::vector<explore::FrequencyEntry> entries;
    for (const auto& v : col.cells()) {
        if (std::holds_alternative<std::monostate>(v)) {
            continue;
        }
        const auto level = explore::format_value(v);
        auto it = std::find_if(entries.begin(), entries.end(), [&](const auto& e) { return e.level == level; });
        if (it == entries.end()) {
            entries.push_back({level, 1});
        } else {
            ++it->count;
        }
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.count != b.count ? a.count > b.count : a.level < b.level;
    });
    return {entries};
}

struct ScanSummary {
    double min, q1, median, q3, max, mean;
    std::optional<double> sd;
};

inline ScanSummary scan_summary(const std::vector<double>& xs) {
    ScanSummary s{};
    s.min = *std::min_element(xs.begin(), xs.end());
    s.max = *std::max_element(xs.begin(), xs.end());
    s.q1 = quantile_type7(xs, 0.25);
    s.median = quantile_type7(xs, 0.5);
    s.q3 = quantile_type7(xs, 0.75);
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    s.mean = sum / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) {
            ss += (x - s.mean) * (x - s.mean);
        }
        s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return s;
}

}  // namespace oracle
