#pragma once

#include <cstddef>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "explore/error.hpp"
#include "explore/value.hpp"

namespace explore {

/// A named, typed column. Every cell is either missing or of the column's dtype.
class Column {
public:
    Column(std::string name, DType dtype, std::vector<Value> cells);

    const std::string& name() const noexcept { return name_; }
    DType dtype() const noexcept { return dtype_; }
    const std::vector<Value>& cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    const Value& operator[](std::size_t row) const { return cells_[row]; }

    friend bool operator==(const Column&, const Column&) = default;

private:
    std::string name_;
    DType dtype_;
    std::vector<Value> cells_;
};

/// Immutable columnar table. Construction validates the shape invariants.
class Table {
public:
    Table() = default;
    Table(std::string name, std::vector<Column> columns);

    const std::string& name() const noexcept { return name_; }
    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::size_t n_rows() const noexcept { return n_rows_; }
    std::size_t n_columns() const noexcept { return columns_.size(); }

    /// Throws Error(unknown_column).
    const Column& column(std::string_view name) const;
    std::size_t column_index(std::string_view name) const;
    bool has_column(std::string_view name) const;

    /// New table holding the given rows (in the given order) of every column.
    Table take_rows(const std::vector<std::size_t>& rows) const;

    friend bool operator==(const Table&, const Table&) = default;

private:
    std::string name_;
    std::vector<Column> columns_;
    std::size_t n_rows_ = 0;
};

struct ColumnSchema {
    std::string name;
    DType dtype;
    std::size_t n_missing = 0;
    std::size_t n_distinct = 0;

    friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

struct Schema {
    std::size_t n_rows = 0;
    std::vector<ColumnSchema> columns;

    friend bool operator==(const Schema&, const Schema&) = default;
};

struct ParseOptions {
    char delimiter = ',';
    bool has_header = true;
    std::set<std::string> na_tokens{"", "NA", "NaN"};
};

/// Parses UTF-8 delimited text. Throws Error with codes empty_input, ragged_rows,
/// encoding_error, unsupported_format or invalid_header.
Table parse_csv(std::string_view bytes, const ParseOptions& options = {}, std::string name = "data");

/// RFC-4180 style serialization, LF line endings, missing as empty field.
std::string to_csv(const Table& table, char delimiter = ',');

Schema schema(const Table& table);

/// Infers the dtype of a list of raw tokens (missing tokens already removed).
DType infer_dtype(const std::vector<std::string_view>& tokens);

}  // namespace explore
