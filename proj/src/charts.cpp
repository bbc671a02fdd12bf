#include "explore/charts.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace explore {

std::size_t sturges_bins(std::size_t n) {
    if (n <= 1) {
        return 1;
    }
    return static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(n)) + 1.0));
}

HistogramData histogram(const std::vector<double>& values, std::optional<std::size_t> n_bins) {
    if (n_bins && *n_bins == 0) {
        throw Error(ErrorCode::zero_bins, "histogram needs at least one bin");
    }
    std::vector<double> finite;
    finite.reserve(values.size());
    for (double v : values) {
        if (std::isfinite(v)) {
            finite.push_back(v);
        }
    }
    if (finite.empty()) {
        throw Error(ErrorCode::all_missing, "no finite values to bin");
    }
    auto [mn, mx] = std::minmax_element(finite.begin(), finite.end());
    double lo = *mn;
    double range = *mx - *mn;
    std::size_t k = n_bins.value_or(sturges_bins(finite.size()));
    if (range == 0.0) {
        lo -= 0.5;
        range = 1.0;
        if (!n_bins) {
            k = 1;
        }
    }

    // Bin boundaries are offsets from the lower edge so that shifting the data shifts edges without
    // changing membership.
    std::vector<double> offsets(k + 1);
    for (std::size_t i = 0; i < k; ++i) {
        offsets[i] = static_cast<double>(i) * range / static_cast<double>(k);
    }
    offsets[k] = range;

    HistogramData out;
    out.edges.resize(k + 1);
    for (std::size_t i = 0; i <= k; ++i) {
        out.edges[i] = lo + offsets[i];
    }
    out.counts.assign(k, 0);
    for (double v : finite) {
        const double d = v - lo;
        auto idx = static_cast<std::ptrdiff_t>(std::floor(d / range * static_cast<double>(k)));
        idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(k) - 1);
        auto i = static_cast<std::size_t>(idx);
        while (i > 0 && d < offsets[i]) {
            --i;
        }
        while (i + 1 < k && d >= offsets[i + 1]) {
            ++i;
        }
        ++out.counts[i];
    }
    out.n_used = finite.size();
    return out;
}

HistogramData histogram(const Table& table, const std::string& column, std::optional<std::size_t> n_bins) {
    const auto& col = table.column(column);
    if (!is_numeric(col.dtype())) {
        throw Error(ErrorCode::non_numeric_column, "histogram requires a numeric column; '" + column + "' is " +
                                                       std::string(to_string(col.dtype())),
                    {{"column", column}});
    }
    std::vector<double> xs;
    for (const auto& v : col.cells()) {
        if (auto d = as_double(v)) {
            xs.push_back(*d);
        }
    }
    if (xs.empty()) {
        throw Error(ErrorCode::all_missing, "column '" + column + "' has no non-missing values", {{"column", column}});
    }
    auto out = histogram(xs, n_bins);
    out.label = column;
    return out;
}

XYSeries xy_series(const Table& table, const std::string& x, const std::string& y, XYKind kind) {
    const auto& xc = table.column(x);
    const auto& yc = table.column(y);
    if (!is_numeric(xc.dtype()) && xc.dtype() != DType::date) {
        throw Error(ErrorCode::type_mismatch, "x column '" + x + "' must be numeric or date", {{"column", x}});
    }
    if (!is_numeric(yc.dtype())) {
        throw Error(ErrorCode::type_mismatch, "y column '" + y + "' must be numeric", {{"column", y}});
    }
    XYSeries out;
    out.kind = kind;
    out.x_is_date = xc.dtype() == DType::date;
    out.x_label = x;
    out.y_label = y;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        std::optional<double> xv;
        if (const auto* d = std::get_if<Date>(&xc[r])) {
            xv = static_cast<double>(days_since_epoch(*d));
        } else {
            xv = as_double(xc[r]);
        }
        const auto yv = as_double(yc[r]);
        if (xv && yv) {
            out.points.push_back({*xv, *yv});
        }
    }
    if (kind == XYKind::line) {
        std::stable_sort(out.points.begin(), out.points.end(),
                         [](const XYPoint& a, const XYPoint& b) { return a.x < b.x; });
    }
    return out;
}

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape_xml(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default:
                // Control characters other than tab/newline are not allowed in XML 1.0.
                if (static_cast<unsigned char>(c) < 0x20 && c != '\t' && c != '\n') {
                    out += ' ';
                } else {
                    out += c;
                }
        }
    }
    return out;
}

struct Frame {
    double left = 60, right = 20, top = 30, bottom = 50;
    double width = 640, height = 400;
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;

    double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
    double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

void widen(double& lo, double& hi) {
    if (!(hi > lo)) {
        lo -= 0.5;
        hi += 0.5;
    }
}

class SvgWriter {
public:
    SvgWriter(const Frame& f, std::string_view title) : f_(f) {
        out_ += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
        out_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(f.width) + "\" height=\"" +
                num(f.height) + "\" viewBox=\"0 0 " + num(f.width) + " " + num(f.height) + "\">\n";
        if (!title.empty()) {
            out_ += "<title>" + escape_xml(title) + "</title>\n";
            text(f.width / 2, 18, title, "middle", 14);
        }
    }

    void axes(const std::vector<std::pair<double, std::string>>& x_ticks,
              const std::vector<std::pair<double, std::string>>& y_ticks) {
        const double xb = f_.left, xe = f_.width - f_.right;
        const double yb = f_.height - f_.bottom, ye = f_.top;
        out_ += "<g class=\"axes\" stroke=\"#333\" stroke-width=\"1\">\n";
        line(xb, yb, xe, yb);
        line(xb, yb, xb, ye);
        for (const auto& [x, _] : x_ticks) {
            line(f_.px(x), yb, f_.px(x), yb + 5);
        }
        for (const auto& [y, _] : y_ticks) {
            line(xb - 5, f_.py(y), xb, f_.py(y));
        }
        out_ += "</g>\n<g class=\"tick-labels\" font-family=\"sans-serif\" font-size=\"10\" fill=\"#333\">\n";
        for (const auto& [x, label] : x_ticks) {
            text(f_.px(x), yb + 18, label, "middle", 10);
        }
        for (const auto& [y, label] : y_ticks) {
            text(xb - 8, f_.py(y) + 3, label, "end", 10);
        }
        out_ += "</g>\n";
    }

    void line(double x1, double y1, double x2, double y2, std::string_view extra = {}) {
        out_ += "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" + num(y2) + "\"";
        if (!extra.empty()) {
            out_ += " ";
            out_ += extra;
        }
        out_ += "/>\n";
    }

    void rect(double x, double y, double w, double h) {
        out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(std::max(0.0, w)) + "\" height=\"" +
                num(std::max(0.0, h)) + "\" fill=\"#4c72b0\" stroke=\"#ffffff\"/>\n";
    }

    void text(double x, double y, std::string_view s, std::string_view anchor, int size) {
        out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + std::string(anchor) +
                "\" font-size=\"" + std::to_string(size) + "\">" + escape_xml(s) + "</text>\n";
    }

    void raw(const std::string& s) { out_ += s; }

    std::string finish() {
        out_ += "</svg>\n";
        return std::move(out_);
    }

private:
    const Frame& f_;
    std::string out_;
};

std::vector<std::pair<double, std::string>> linear_ticks(double lo, double hi, int n = 5) {
    std::vector<std::pair<double, std::string>> ticks;
    for (int i = 0; i <= n; ++i) {
        const double v = lo + (hi - lo) * i / n;
        ticks.emplace_back(v, tick_label(v));
    }
    return ticks;
}

std::string render(const HistogramData& h, Frame f) {
    if (h.counts.empty()) {
        throw Error(ErrorCode::empty_data, "histogram has no bins");
    }
    f.x0 = h.edges.front();
    f.x1 = h.edges.back();
    f.y0 = 0;
    f.y1 = static_cast<double>(std::max<std::size_t>(1, *std::max_element(h.counts.begin(), h.counts.end())));
    SvgWriter w(f, h.label.empty() ? "Histogram" : "Histogram of " + h.label);
    w.raw("<g class=\"bars\">\n");
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const double c = static_cast<double>(h.counts[i]);
        w.rect(f.px(h.edges[i]), f.py(c), f.px(h.edges[i + 1]) - f.px(h.edges[i]), f.py(0) - f.py(c));
    }
    w.raw("</g>\n");
    w.axes(linear_ticks(f.x0, f.x1), linear_ticks(f.y0, f.y1));
    return w.finish();
}

std::string render(const XYSeries& s, Frame f) {
    if (s.points.empty()) {
        throw Error(ErrorCode::empty_data, "series has no complete points");
    }
    auto [xmin, xmax] = std::minmax_element(s.points.begin(), s.points.end(),
                                            [](const XYPoint& a, const XYPoint& b) { return a.x < b.x; });
    auto [ymin, ymax] = std::minmax_element(s.points.begin(), s.points.end(),
                                            [](const XYPoint& a, const XYPoint& b) { return a.y < b.y; });
    f.x0 = xmin->x;
    f.x1 = xmax->x;
    f.y0 = ymin->y;
    f.y1 = ymax->y;
    widen(f.x0, f.x1);
    widen(f.y0, f.y1);
    SvgWriter w(f, s.y_label + " vs " + s.x_label);
    if (s.kind == XYKind::line) {
        std::string pts;
        for (const auto& p : s.points) {
            pts += num(f.px(p.x)) + "," + num(f.py(p.y)) + " ";
        }
        w.raw("<polyline fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n");
    } else {
        w.raw("<g class=\"points\" fill=\"#4c72b0\">\n");
        for (const auto& p : s.points) {
            w.raw("<circle cx=\"" + num(f.px(p.x)) + "\" cy=\"" + num(f.py(p.y)) + "\" r=\"2.5\"/>\n");
        }
        w.raw("</g>\n");
    }
    auto x_ticks = linear_ticks(f.x0, f.x1);
    if (s.x_is_date) {
        for (auto& [v, label] : x_ticks) {
            const auto days = std::chrono::sys_days{std::chrono::days{static_cast<long>(std::llround(v))}};
            const std::chrono::year_month_day ymd{days};
            label = format_date(Date{static_cast<int>(ymd.year()), static_cast<int>(static_cast<unsigned>(ymd.month())),
                                     static_cast<int>(static_cast<unsigned>(ymd.day()))});
        }
    }
    w.axes(x_ticks, linear_ticks(f.y0, f.y1));
    return w.finish();
}

std::string render(const FrequencyTable& t, Frame f) {
    if (t.entries.empty()) {
        throw Error(ErrorCode::empty_data, "frequency table is empty");
    }
    const auto n = static_cast<double>(t.entries.size());
    f.x0 = 0;
    f.x1 = n;
    f.y0 = 0;
    f.y1 = static_cast<double>(t.entries.front().count);
    widen(f.y0, f.y1);
    SvgWriter w(f, "Distribution");
    w.raw("<g class=\"bars\">\n");
    std::vector<std::pair<double, std::string>> x_ticks;
    for (std::size_t i = 0; i < t.entries.size(); ++i) {
        const double c = static_cast<double>(t.entries[i].count);
        const double x = static_cast<double>(i);
        w.rect(f.px(x + 0.1), f.py(c), f.px(x + 0.9) - f.px(x + 0.1), f.py(0) - f.py(c));
        x_ticks.emplace_back(x + 0.5, t.entries[i].level);
    }
    w.raw("</g>\n");
    w.axes(x_ticks, linear_ticks(f.y0, f.y1));
    return w.finish();
}

std::string render(const SeriesPlotData& s, Frame f) {
    if (s.values.empty()) {
        throw Error(ErrorCode::empty_data, "series is empty");
    }
    auto [ymin, ymax] = std::minmax_element(s.values.begin(), s.values.end());
    f.x0 = 0;
    f.x1 = static_cast<double>(s.values.size() - 1);
    f.y0 = *ymin;
    f.y1 = *ymax;
    if (s.reference_line) {
        f.y0 = std::min(f.y0, *s.reference_line);
        f.y1 = std::max(f.y1, *s.reference_line);
    }
    widen(f.x0, f.x1);
    widen(f.y0, f.y1);
    SvgWriter w(f, s.label);
    std::string pts;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        pts += num(f.px(static_cast<double>(i))) + "," + num(f.py(s.values[i])) + " ";
    }
    w.raw("<polyline fill=\"none\" stroke=\"#4c72b0\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n");
    if (s.reference_line) {
        w.line(f.left, f.py(*s.reference_line), f.width - f.right, f.py(*s.reference_line),
               "class=\"mean-line\" stroke=\"#c44e52\" stroke-dasharray=\"6,4\"");
    }
    std::vector<std::pair<double, std::string>> x_ticks;
    const std::size_t n = s.values.size();
    const std::size_t step = std::max<std::size_t>(1, n / 6);
    for (std::size_t i = 0; i < n; i += step) {
        x_ticks.emplace_back(static_cast<double>(i), i < s.times.size() ? s.times[i] : std::to_string(i + 1));
    }
    w.axes(x_ticks, linear_ticks(f.y0, f.y1));
    return w.finish();
}

}  // namespace

std::string render_svg(const ChartData& data, SvgSize size) {
    Frame f;
    f.width = size.width;
    f.height = size.height;
    return std::visit([&](const auto& d) { return render(d, f); }, data);
}

}  // namespace explore
