#include "explore/table.hpp"

#include <algorithm>
#include <unordered_set>

namespace explore {

namespace {

bool cell_matches(const Value& v, DType dtype) {
    switch (dtype) {
        case DType::integer: return std::holds_alternative<std::int64_t>(v);
        case DType::real: return std::holds_alternative<double>(v);
        case DType::boolean: return std::holds_alternative<bool>(v);
        case DType::text: return std::holds_alternative<std::string>(v);
        case DType::date: return std::holds_alternative<Date>(v);
    }
    return false;
}

// Returns the byte offset of the first invalid sequence, or npos.
std::size_t find_invalid_utf8(std::string_view s) {
    std::size_t i = 0;
    const auto n = s.size();
    while (i < n) {
        const auto c = static_cast<unsigned char>(s[i]);
        std::size_t len = 0;
        std::uint32_t cp = 0;
        if (c < 0x80) {
            ++i;
            continue;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        } else {
            return i;
        }
        if (i + len > n) {
            return i;
        }
        for (std::size_t k = 1; k < len; ++k) {
            const auto cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) {
                return i;
            }
            cp = (cp << 6) | (cc & 0x3F);
        }
        const bool overlong = (len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000);
        if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            return i;
        }
        i += len;
    }
    return std::string_view::npos;
}

struct Record {
    std::vector<std::string> fields;
    std::size_t line = 0;
};

std::vector<Record> split_records(std::string_view text, char delim) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(current));
        current = Record{};
        current.line = line;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == delim) {
            end_field();
        } else if (c == '\n' || (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n')) {
            if (c == '\r') {
                ++i;
            }
            ++line;
            end_record();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw Error(ErrorCode::ragged_rows, "unterminated quoted field starting on line " + std::to_string(current.line),
                    {{"line", current.line}});
    }
    // A trailing newline terminates the last record rather than opening a new one.
    if (!current.fields.empty() || !field.empty() || field_started) {
        end_record();
    }
    return records;
}

Value convert(std::string_view token, DType dtype) {
    switch (dtype) {
        case DType::integer: return *parse_integer(token);
        case DType::real: return *parse_real(token);
        case DType::boolean: return *parse_boolean(token);
        case DType::date: return *parse_date(token);
        case DType::text: return std::string(token);
    }
    return std::monostate{};
}

bool needs_quoting(std::string_view s, char delim) {
    return s.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string_view::npos;
}

void write_field(std::string& out, std::string_view s, char delim) {
    if (!needs_quoting(s, delim)) {
        out += s;
        return;
    }
    out.push_back('"');
    for (char c : s) {
        if (c == '"') {
            out.push_back('"');
        }
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace

Column::Column(std::string name, DType dtype, std::vector<Value> cells)
    : name_(std::move(name)), dtype_(dtype), cells_(std::move(cells)) {
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (!is_missing(cells_[i]) && !cell_matches(cells_[i], dtype_)) {
            throw Error(ErrorCode::type_mismatch, "column '" + name_ + "' row " + std::to_string(i + 1) +
                                                      " is not of type " + std::string(to_string(dtype_)));
        }
    }
}

Table::Table(std::string name, std::vector<Column> columns) : name_(std::move(name)), columns_(std::move(columns)) {
    std::unordered_set<std::string> seen;
    n_rows_ = columns_.empty() ? 0 : columns_.front().size();
    for (const auto& c : columns_) {
        if (c.name().empty()) {
            throw Error(ErrorCode::invalid_header, "column names must be non-empty");
        }
        if (!seen.insert(c.name()).second) {
            throw Error(ErrorCode::invalid_header, "duplicate column name '" + c.name() + "'",
                        {{"column", c.name()}});
        }
        if (c.size() != n_rows_) {
            throw Error(ErrorCode::ragged_rows, "column '" + c.name() + "' has " + std::to_string(c.size()) +
                                                    " cells, expected " + std::to_string(n_rows_));
        }
    }
}

std::size_t Table::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
        if (columns_[i].name() == name) {
            return i;
        }
    }
    throw Error(ErrorCode::unknown_column, "unknown column '" + std::string(name) + "'",
                {{"column", std::string(name)}});
}

const Column& Table::column(std::string_view name) const { return columns_[column_index(name)]; }

bool Table::has_column(std::string_view name) const {
    return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name() == name; });
}

Table Table::take_rows(const std::vector<std::size_t>& rows) const {
    std::vector<Column> out;
    out.reserve(columns_.size());
    for (const auto& c : columns_) {
        std::vector<Value> cells;
        cells.reserve(rows.size());
        for (auto r : rows) {
            cells.push_back(c[r]);
        }
        out.emplace_back(c.name(), c.dtype(), std::move(cells));
    }
    return Table(name_, std::move(out));
}

DType infer_dtype(const std::vector<std::string_view>& tokens) {
    auto all = [&](auto&& pred) { return std::all_of(tokens.begin(), tokens.end(), pred); };
    if (all([](std::string_view t) { return parse_integer(t).has_value(); })) {
        return DType::integer;
    }
    if (all([](std::string_view t) { return parse_real(t).has_value(); })) {
        return DType::real;
    }
    if (all([](std::string_view t) { return parse_boolean(t).has_value(); })) {
        return DType::boolean;
    }
    if (all([](std::string_view t) { return parse_date(t).has_value(); })) {
        return DType::date;
    }
    return DType::text;
}

Table parse_csv(std::string_view bytes, const ParseOptions& options, std::string name) {
    if (bytes.size() >= 4 && bytes.substr(0, 4) == std::string_view("PK\x03\x04", 4)) {
        throw Error(ErrorCode::unsupported_format,
                    "spreadsheet (XLSX/ZIP) input is not supported; export the sheet as CSV and upload that");
    }
    if (bytes.size() >= 3 && bytes.substr(0, 3) == "\xEF\xBB\xBF") {
        bytes.remove_prefix(3);
    }
    if (auto bad = find_invalid_utf8(bytes); bad != std::string_view::npos) {
        throw Error(ErrorCode::encoding_error, "input is not valid UTF-8 (byte offset " + std::to_string(bad) + ")",
                    {{"offset", bad}});
    }

    auto records = split_records(bytes, options.delimiter);
    std::vector<std::string> names;
    std::size_t first_data = 0;
    if (options.has_header) {
        if (records.empty()) {
            throw Error(ErrorCode::empty_input, "input has no header row");
        }
        names = records.front().fields;
        first_data = 1;
    } else if (!records.empty()) {
        for (std::size_t i = 0; i < records.front().fields.size(); ++i) {
            names.push_back("col" + std::to_string(i + 1));
        }
    }
    const std::size_t width = names.size();

    // With several columns a blank line cannot be a valid row; skip it. With one column it is a missing cell.
    std::vector<const Record*> data;
    for (std::size_t i = first_data; i < records.size(); ++i) {
        const auto& rec = records[i];
        const bool blank = rec.fields.size() == 1 && rec.fields.front().empty();
        if (blank && width > 1) {
            continue;
        }
        data.push_back(&rec);
    }
    if (data.empty()) {
        throw Error(ErrorCode::empty_input, "input has no data rows");
    }
    for (std::size_t r = 0; r < data.size(); ++r) {
        if (data[r]->fields.size() != width) {
            const auto row = r + 1;
            throw Error(ErrorCode::ragged_rows,
                        "row " + std::to_string(row) + " has " + std::to_string(data[r]->fields.size()) +
                            " fields, expected " + std::to_string(width),
                        {{"row", row}, {"line", data[r]->line}});
        }
    }

    std::vector<Column> columns;
    columns.reserve(width);
    for (std::size_t c = 0; c < width; ++c) {
        std::vector<std::string_view> tokens;
        for (const auto* rec : data) {
            const auto& f = rec->fields[c];
            if (!options.na_tokens.contains(f)) {
                tokens.push_back(f);
            }
        }
        const auto dtype = infer_dtype(tokens);
        std::vector<Value> cells;
        cells.reserve(data.size());
        for (const auto* rec : data) {
            const auto& f = rec->fields[c];
            cells.push_back(options.na_tokens.contains(f) ? Value{} : convert(f, dtype));
        }
        if (names[c].empty()) {
            throw Error(ErrorCode::invalid_header, "header field " + std::to_string(c + 1) + " is empty",
                        {{"column_index", c + 1}});
        }
        columns.emplace_back(names[c], dtype, std::move(cells));
    }
    return Table(std::move(name), std::move(columns));
}

std::string to_csv(const Table& table, char delimiter) {
    std::string out;
    const auto& cols = table.columns();
    for (std::size_t c = 0; c < cols.size(); ++c) {
        if (c > 0) {
            out.push_back(delimiter);
        }
        write_field(out, cols[c].name(), delimiter);
    }
    out.push_back('\n');
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) {
            if (c > 0) {
                out.push_back(delimiter);
            }
            write_field(out, format_value(cols[c][r]), delimiter);
        }
        out.push_back('\n');
    }
    return out;
}

Schema schema(const Table& table) {
    Schema out;
    out.n_rows = table.n_rows();
    for (const auto& c : table.columns()) {
        ColumnSchema cs{c.name(), c.dtype(), 0, 0};
        std::set<Value> distinct;
        for (const auto& v : c.cells()) {
            if (is_missing(v)) {
                ++cs.n_missing;
            } else {
                distinct.insert(v);
            }
        }
        cs.n_distinct = distinct.size();
        out.columns.push_back(std::move(cs));
    }
    return out;
}

}  // namespace explore
