#include "explore/value.hpp"

#include <array>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>

namespace explore {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) {
        return false;
    }
    for (char c : s) {
        if (c < '0' || c > '9') {
            return false;
        }
    }
    return true;
}

}  // namespace

bool is_valid_date(int year, int month, int day) {
    if (month < 1 || month > 12 || day < 1) {
        return false;
    }
    return std::chrono::year_month_day{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                       std::chrono::day{static_cast<unsigned>(day)}}
        .ok();
}

std::optional<Date> parse_date(std::string_view text) {
    // YYYY-MM-DD exactly.
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        return std::nullopt;
    }
    auto y = text.substr(0, 4);
    auto m = text.substr(5, 2);
    auto d = text.substr(8, 2);
    if (!all_digits(y) || !all_digits(m) || !all_digits(d)) {
        return std::nullopt;
    }
    Date date{std::stoi(std::string(y)), std::stoi(std::string(m)), std::stoi(std::string(d))};
    if (!is_valid_date(date.year, date.month, date.day)) {
        return std::nullopt;
    }
    return date;
}

std::string format_date(const Date& date) {
    std::array<char, 16> buf{};
    std::snprintf(buf.data(), buf.size(), "%04d-%02d-%02d", date.year, date.month, date.day);
    return buf.data();
}

std::int64_t days_since_epoch(const Date& date) {
    using namespace std::chrono;
    const sys_days days{year{date.year} / month{static_cast<unsigned>(date.month)} /
                        day{static_cast<unsigned>(date.day)}};
    return days.time_since_epoch().count();
}

std::string_view to_string(DType dtype) {
    switch (dtype) {
        case DType::integer: return "integer";
        case DType::real: return "real";
        case DType::boolean: return "boolean";
        case DType::text: return "text";
        case DType::date: return "date";
    }
    return "text";
}

std::optional<DType> parse_dtype(std::string_view name) {
    for (auto t : {DType::integer, DType::real, DType::boolean, DType::text, DType::date}) {
        if (to_string(t) == name) {
            return t;
        }
    }
    return std::nullopt;
}

std::optional<double> as_double(const Value& v) {
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return static_cast<double>(*i);
    }
    if (const auto* d = std::get_if<double>(&v)) {
        return *d;
    }
    return std::nullopt;
}

std::optional<std::int64_t> parse_integer(std::string_view text) {
    std::string_view digits = text;
    if (!digits.empty() && digits.front() == '-') {
        digits.remove_prefix(1);
    }
    if (!all_digits(digits)) {
        return std::nullopt;
    }
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        return std::nullopt;
    }
    return out;
}

std::optional<double> parse_real(std::string_view text) {
    if (text.empty()) {
        return std::nullopt;
    }
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size() || std::isnan(out)) {
        return std::nullopt;
    }
    return out;
}

std::optional<bool> parse_boolean(std::string_view text) {
    if (text == "true" || text == "TRUE") {
        return true;
    }
    if (text == "false" || text == "FALSE") {
        return false;
    }
    return std::nullopt;
}

std::string format_real(double value) {
    std::array<char, 64> buf{};
    auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    std::string out(buf.data(), ptr);
    if (parse_integer(out)) {
        out += ".0";
    }
    return out;
}

std::string format_value(const Value& v) {
    struct Visitor {
        std::string operator()(std::monostate) const { return {}; }
        std::string operator()(std::int64_t i) const { return std::to_string(i); }
        std::string operator()(double d) const { return format_real(d); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const { return s; }
        std::string operator()(const Date& d) const { return format_date(d); }
    };
    return std::visit(Visitor{}, v);
}

}  // namespace explore
