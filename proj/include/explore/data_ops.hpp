#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "explore/table.hpp"

namespace explore {

enum class Comparator { eq, ne, lt, le, gt, ge, contains, is_missing, not_missing };

std::string_view to_string(Comparator op);
std::optional<Comparator> parse_comparator(std::string_view text);

/// Boolean filter expression: a leaf comparison or an AND/OR/NOT combinator.
struct Predicate {
    enum class Kind { compare, all_of, any_of, negate };

    Kind kind = Kind::compare;
    std::string column;
    Comparator op = Comparator::eq;
    Value operand;
    std::vector<Predicate> children;

    static Predicate compare(std::string column, Comparator op, Value operand = {});
    static Predicate all_of(std::vector<Predicate> children);
    static Predicate any_of(std::vector<Predicate> children);
    static Predicate negate(Predicate child);
};

enum class AggFunction { sum, mean, count, min, max, median, sd };

std::string_view to_string(AggFunction fn);
std::optional<AggFunction> parse_agg_function(std::string_view text);

struct Measure {
    std::string column;
    AggFunction function = AggFunction::count;
};

struct AggregationSpec {
    std::vector<std::string> group_keys;
    std::vector<Measure> measures;
};

struct ColumnSummary {
    std::size_t n = 0;
    std::size_t n_missing = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double mean = 0.0;
    std::optional<double> sd;

    friend bool operator==(const ColumnSummary&, const ColumnSummary&) = default;
};

struct FrequencyEntry {
    std::string level;
    std::size_t count = 0;

    friend bool operator==(const FrequencyEntry&, const FrequencyEntry&) = default;
};

struct FrequencyTable {
    std::vector<FrequencyEntry> entries;

    friend bool operator==(const FrequencyTable&, const FrequencyTable&) = default;
};

/// Throws unknown_column / type_mismatch when the predicate does not fit the schema.
void validate_predicate(const Table& table, const Predicate& predicate);
bool evaluate(const Table& table, const Predicate& predicate, std::size_t row);

Table filter_rows(const Table& table, const Predicate& predicate);
Table select_columns(const Table& table, const std::vector<std::string>& names);
Table group_aggregate(const Table& table, const AggregationSpec& spec);
ColumnSummary summarize_column(const Table& table, const std::string& name);
FrequencyTable value_counts(const Table& table, const std::string& name);

/// Type-7 quantile of already sorted data: x[k] + g * (x[k+1] - x[k]), h = (n-1)p.
double quantile_sorted(std::span<const double> sorted, double p);
/// Sample standard deviation (n-1 denominator); nullopt below two values.
std::optional<double> sample_sd(std::span<const double> values);
double mean_of(std::span<const double> values);

}  // namespace explore
