#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "explore/data_ops.hpp"
#include "explore/table.hpp"

namespace explore {

struct HistogramData {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::size_t n_used = 0;
    std::string label;
};

enum class XYKind { scatter, line };

struct XYPoint {
    double x = 0.0;
    double y = 0.0;
};

struct XYSeries {
    XYKind kind = XYKind::scatter;
    /// True when x holds days since 1970-01-01 of a date column.
    bool x_is_date = false;
    std::vector<XYPoint> points;
    std::string x_label;
    std::string y_label;
};

struct SeriesPlotData {
    std::vector<std::string> times;
    std::vector<double> values;
    std::optional<double> reference_line;
    std::string label;
};

/// Bin count request: a fixed count, or nullopt for the Sturges rule.
HistogramData histogram(const Table& table, const std::string& column, std::optional<std::size_t> n_bins);
HistogramData histogram(const std::vector<double>& values, std::optional<std::size_t> n_bins);

/// Sturges: ceil(log2(n) + 1).
std::size_t sturges_bins(std::size_t n);

XYSeries xy_series(const Table& table, const std::string& x, const std::string& y, XYKind kind);

struct SvgSize {
    int width = 640;
    int height = 400;
};

using ChartData = std::variant<HistogramData, XYSeries, FrequencyTable, SeriesPlotData>;

/// Standalone SVG 1.1 document. Throws Error(empty_data) for empty input.
std::string render_svg(const ChartData& data, SvgSize size = {});

}  // namespace explore
