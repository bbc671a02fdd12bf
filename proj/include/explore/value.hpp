#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace explore {

/// Calendar date (proleptic Gregorian), always valid once constructed through parse_date/make_date.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    friend auto operator<=>(const Date&, const Date&) = default;
    friend bool operator==(const Date&, const Date&) = default;
};

bool is_valid_date(int year, int month, int day);
std::optional<Date> parse_date(std::string_view text);
std::string format_date(const Date& date);
/// Days since 1970-01-01.
std::int64_t days_since_epoch(const Date& date);

enum class DType { integer, real, boolean, text, date };

std::string_view to_string(DType dtype);
std::optional<DType> parse_dtype(std::string_view name);
inline bool is_numeric(DType dtype) { return dtype == DType::integer || dtype == DType::real; }

/// A single cell. monostate is the missing marker.
using Value = std::variant<std::monostate, std::int64_t, double, bool, std::string, Date>;

inline bool is_missing(const Value& v) { return std::holds_alternative<std::monostate>(v); }

/// Numeric view of an integer or real cell.
std::optional<double> as_double(const Value& v);

// Strict single-token parsers used by type inference.
std::optional<std::int64_t> parse_integer(std::string_view text);
std::optional<double> parse_real(std::string_view text);
std::optional<bool> parse_boolean(std::string_view text);

/// Shortest round-trip decimal; integral values keep a ".0" so they re-infer as real.
std::string format_real(double value);

/// Text rendering of a cell; missing renders as the empty string.
std::string format_value(const Value& v);

}  // namespace explore
