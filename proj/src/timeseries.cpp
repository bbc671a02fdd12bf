#include "explore/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "explore/distributions.hpp"

namespace explore::ts {

namespace {

bool supported_frequency(int f) { return f == 1 || f == 4 || f == 12; }

double mean(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size()); }

double sample_variance(std::span<const double> x) {
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) {
        ss += (v - m) * (v - m);
    }
    return ss / static_cast<double>(x.size() - 1);
}

std::int64_t time_index(int year, int period, int frequency) {
    return static_cast<std::int64_t>(year) * frequency + (period - 1);
}

std::pair<int, int> from_index(std::int64_t t, int frequency) {
    auto year = t / frequency;
    auto rem = t % frequency;
    if (rem < 0) {
        rem += frequency;
        --year;
    }
    return {static_cast<int>(year), static_cast<int>(rem) + 1};
}

int integer_cell(const Column& col, std::size_t row, const std::string& what) {
    const auto& v = col[row];
    if (const auto* i = std::get_if<std::int64_t>(&v)) {
        return static_cast<int>(*i);
    }
    if (is_missing(v)) {
        throw Error(ErrorCode::missing_value_in_series,
                    what + " column '" + col.name() + "' is missing at row " + std::to_string(row + 1),
                    {{"row", row + 1}});
    }
    throw Error(ErrorCode::type_mismatch, what + " column '" + col.name() + "' must be integer", {{"column", col.name()}});
}

struct Stamped {
    std::int64_t t;
    std::size_t row;
};

// Sorts by time index and checks the sequence is gap- and duplicate-free at the given step.
TimeSeries assemble(const Column& values, std::vector<Stamped> stamps, int frequency, std::int64_t step) {
    std::stable_sort(stamps.begin(), stamps.end(), [](const Stamped& a, const Stamped& b) { return a.t < b.t; });
    for (std::size_t i = 1; i < stamps.size(); ++i) {
        const auto diff = stamps[i].t - stamps[i - 1].t;
        if (diff == 0) {
            auto [y, p] = from_index(stamps[i].t / step, frequency);
            const auto label = time_label(y, p, frequency);
            throw Error(ErrorCode::duplicate_timestamp, "duplicate timestamp " + label,
                        {{"timestamp", label}, {"row", stamps[i].row + 1}});
        }
        if (diff != step) {
            auto [y, p] = from_index(stamps[i - 1].t / step + 1, frequency);
            const auto label = time_label(y, p, frequency);
            throw Error(ErrorCode::gap_in_series, "series has a gap: no observation for " + label,
                        {{"timestamp", label}});
        }
    }
    TimeSeries out;
    out.frequency = frequency;
    auto [y, p] = from_index(stamps.front().t / step, frequency);
    out.start_year = y;
    out.start_period = p;
    for (const auto& s : stamps) {
        const auto v = as_double(values[s.row]);
        if (!v) {
            auto [yy, pp] = from_index(s.t / step, frequency);
            const auto label = time_label(yy, pp, frequency);
            throw Error(ErrorCode::missing_value_in_series, "value missing at " + label,
                        {{"timestamp", label}, {"row", s.row + 1}});
        }
        out.values.push_back(*v);
    }
    return out;
}

int infer_period_frequency(const Column& period_col, int max_period) {
    if (max_period > 4) {
        return 12;
    }
    std::string name = period_col.name();
    std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::tolower(c); });
    if (name.find("quarter") != std::string::npos || name.find("qtr") != std::string::npos || name == "q") {
        return 4;
    }
    return 12;
}

}  // namespace

void validate(const TimeSeries& series) {
    if (series.values.empty()) {
        throw Error(ErrorCode::series_too_short, "series is empty");
    }
    if (!supported_frequency(series.frequency)) {
        throw Error(ErrorCode::unsupported_frequency,
                    "frequency " + std::to_string(series.frequency) + " is not supported (use 1, 4 or 12)");
    }
    if (series.start_period < 1 || series.start_period > series.frequency) {
        throw Error(ErrorCode::invalid_spec, "start period must lie in [1, frequency]");
    }
    for (double v : series.values) {
        if (!std::isfinite(v)) {
            throw Error(ErrorCode::missing_value_in_series, "series contains a non-finite value");
        }
    }
}

std::pair<int, int> time_at(const TimeSeries& series, std::ptrdiff_t offset) {
    return from_index(time_index(series.start_year, series.start_period, series.frequency) + offset,
                      series.frequency);
}

std::string time_label(int year, int period, int frequency) {
    char buf[32];
    if (frequency == 12) {
        std::snprintf(buf, sizeof buf, "%04d-%02d", year, period);
    } else if (frequency == 4) {
        std::snprintf(buf, sizeof buf, "%04d Q%d", year, period);
    } else if (frequency == 1) {
        std::snprintf(buf, sizeof buf, "%04d", year);
    } else {
        std::snprintf(buf, sizeof buf, "%04d.%d", year, period);
    }
    return buf;
}

std::vector<std::string> time_labels(const TimeSeries& series) {
    std::vector<std::string> out;
    out.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        auto [y, p] = time_at(series, static_cast<std::ptrdiff_t>(i));
        out.push_back(time_label(y, p, series.frequency));
    }
    return out;
}

TimeSeries build_series(const Table& table, const SeriesSpec& spec) {
    const auto& values = table.column(spec.value_col);
    if (!is_numeric(values.dtype())) {
        throw Error(ErrorCode::non_numeric_column, "value column '" + spec.value_col + "' must be numeric",
                    {{"column", spec.value_col}});
    }
    if (spec.frequency && !supported_frequency(*spec.frequency)) {
        throw Error(ErrorCode::unsupported_frequency,
                    "frequency " + std::to_string(*spec.frequency) + " is not supported (use 1, 4 or 12)");
    }
    if (table.n_rows() == 0) {
        throw Error(ErrorCode::series_too_short, "table has no rows");
    }

    if (const auto* ex = std::get_if<ExplicitTime>(&spec.time)) {
        TimeSeries out{{}, ex->start_year, ex->start_period, spec.frequency.value_or(ex->frequency)};
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const auto v = as_double(values[r]);
            if (!v) {
                auto [y, p] = time_at(out, static_cast<std::ptrdiff_t>(r));
                const auto label = time_label(y, p, out.frequency);
                throw Error(ErrorCode::missing_value_in_series, "value missing at " + label,
                            {{"timestamp", label}, {"row", r + 1}});
            }
            out.values.push_back(*v);
        }
        validate(out);
        return out;
    }

    if (const auto* dc = std::get_if<DateColumnTime>(&spec.time)) {
        const auto& dates = table.column(dc->date_col);
        if (dates.dtype() != DType::date) {
            throw Error(ErrorCode::type_mismatch, "time column '" + dc->date_col + "' must be a date column",
                        {{"column", dc->date_col}});
        }
        std::vector<Stamped> months;
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            const auto* d = std::get_if<Date>(&dates[r]);
            if (!d) {
                throw Error(ErrorCode::missing_value_in_series, "date missing at row " + std::to_string(r + 1),
                            {{"row", r + 1}});
            }
            months.push_back({static_cast<std::int64_t>(d->year) * 12 + (d->month - 1), r});
        }
        int frequency = 12;
        if (spec.frequency) {
            frequency = *spec.frequency;
        } else if (months.size() > 1) {
            std::vector<std::int64_t> ts;
            for (const auto& m : months) {
                ts.push_back(m.t);
            }
            std::sort(ts.begin(), ts.end());
            std::int64_t min_step = 0;
            for (std::size_t i = 1; i < ts.size(); ++i) {
                const auto d = ts[i] - ts[i - 1];
                if (d > 0 && (min_step == 0 || d < min_step)) {
                    min_step = d;
                }
            }
            if (min_step == 1 || min_step == 3 || min_step == 12) {
                frequency = static_cast<int>(12 / min_step);
            } else if (min_step != 0) {
                throw Error(ErrorCode::unsupported_frequency,
                            "dates are spaced " + std::to_string(min_step) + " months apart; expected 1, 3 or 12");
            }
        }
        const std::int64_t step = 12 / frequency;
        // Re-express month indices so that t / step is the period index: quarters start at months 1, 4, 7, 10.
        for (auto& m : months) {
            if (frequency != 12) {
                const auto year = m.t / 12;
                const auto month0 = m.t % 12;
                m.t = year * 12 + (month0 / step) * step;
            }
        }
        return assemble(values, std::move(months), frequency, step);
    }

    const auto& yp = std::get<YearPeriodTime>(spec.time);
    const auto& years = table.column(yp.year_col);
    std::vector<Stamped> stamps;
    if (!yp.period_col) {
        const int frequency = spec.frequency.value_or(1);
        if (frequency != 1) {
            throw Error(ErrorCode::invalid_spec, "a year-only layout is annual; add a period column for frequency " +
                                                     std::to_string(frequency));
        }
        for (std::size_t r = 0; r < table.n_rows(); ++r) {
            stamps.push_back({integer_cell(years, r, "year"), r});
        }
        return assemble(values, std::move(stamps), 1, 1);
    }
    const auto& periods = table.column(*yp.period_col);
    int max_period = 0;
    std::vector<std::pair<int, int>> yps;
    for (std::size_t r = 0; r < table.n_rows(); ++r) {
        const int y = integer_cell(years, r, "year");
        const int p = integer_cell(periods, r, "period");
        max_period = std::max(max_period, p);
        yps.emplace_back(y, p);
    }
    const int frequency = spec.frequency.value_or(infer_period_frequency(periods, max_period));
    for (std::size_t r = 0; r < yps.size(); ++r) {
        const auto [y, p] = yps[r];
        if (p < 1 || p > frequency) {
            throw Error(ErrorCode::invalid_spec,
                        "period " + std::to_string(p) + " at row " + std::to_string(r + 1) + " outside [1, " +
                            std::to_string(frequency) + "]",
                        {{"row", r + 1}});
        }
        stamps.push_back({time_index(y, p, frequency), r});
    }
    return assemble(values, std::move(stamps), frequency, 1);
}

std::vector<double> acf(std::span<const double> x, std::size_t max_lag) {
    const auto n = x.size();
    if (max_lag < 1 || max_lag + 1 > n) {
        throw Error(ErrorCode::lag_out_of_range,
                    "lag " + std::to_string(max_lag) + " outside [1, " + std::to_string(n > 0 ? n - 1 : 0) + "]");
    }
    const double m = mean(x);
    double denom = 0.0;
    for (double v : x) {
        denom += (v - m) * (v - m);
    }
    if (denom == 0.0) {
        throw Error(ErrorCode::constant_series, "autocorrelation undefined for a constant series");
    }
    std::vector<double> rho(max_lag);
    for (std::size_t k = 1; k <= max_lag; ++k) {
        double num = 0.0;
        for (std::size_t t = k; t < n; ++t) {
            num += (x[t] - m) * (x[t - k] - m);
        }
        rho[k - 1] = num / denom;
    }
    return rho;
}

LjungBoxResult ljung_box(std::span<const double> x, std::size_t max_lag, std::size_t fitdf) {
    const auto rho = acf(x, max_lag);
    const auto n = static_cast<double>(x.size());
    LjungBoxResult out;
    out.fitdf = fitdf;
    double sum = 0.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        const double r = rho[k - 1];
        sum += r * r / (n - static_cast<double>(k));
        LjungBoxEntry e;
        e.lag = k;
        e.rho = r;
        e.q = n * (n + 2.0) * sum;
        e.df = k > fitdf ? k - fitdf : 0;
        if (e.df > 0) {
            e.p_value = std::clamp(dist::chi_square_sf(e.q, static_cast<double>(e.df)), 0.0, 1.0);
        }
        out.entries.push_back(e);
    }
    return out;
}

std::size_t kpss_default_lags(std::size_t n) {
    return static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
}

bool is_constant(std::span<const double> x) {
    if (x.empty()) {
        return true;
    }
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    const double range = *hi - *lo;
    const double scale = std::max(std::fabs(*lo), std::fabs(*hi));
    return range == 0.0 || range <= 1e-11 * scale;
}

double kpss_statistic(std::span<const double> x, std::size_t lags) {
    const auto n = x.size();
    if (n < 2) {
        throw Error(ErrorCode::series_too_short, "KPSS needs at least two observations");
    }
    if (lags >= n) {
        throw Error(ErrorCode::lag_out_of_range, "KPSS truncation lag must be below the series length");
    }
    if (is_constant(x)) {
        throw Error(ErrorCode::constant_series, "KPSS statistic undefined for a constant series");
    }
    const double m = mean(x);
    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) {
        e[t] = x[t] - m;
    }
    double partial = 0.0;
    double sum_s2 = 0.0;
    double sum_e2 = 0.0;
    for (double v : e) {
        partial += v;
        sum_s2 += partial * partial;
        sum_e2 += v * v;
    }
    double lrv = sum_e2;
    for (std::size_t j = 1; j <= lags; ++j) {
        double cov = 0.0;
        for (std::size_t t = j; t < n; ++t) {
            cov += e[t] * e[t - j];
        }
        lrv += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(lags + 1)) * cov;
    }
    lrv /= static_cast<double>(n);
    const double nn = static_cast<double>(n);
    return sum_s2 / (nn * nn) / lrv;
}

KpssResult kpss_test(std::span<const double> x) {
    if (x.size() < 8) {
        throw Error(ErrorCode::series_too_short, "KPSS test needs at least 8 observations");
    }
    KpssResult out;
    out.lag_truncation = kpss_default_lags(x.size());
    out.statistic = kpss_statistic(x, out.lag_truncation);
    out.reject_at_5pct = out.statistic > kKpssCriticalValues.at(0.05);
    return out;
}

int ndiffs(std::span<const double> x, double alpha, int max_d) {
    auto crit = kKpssCriticalValues.find(alpha);
    if (crit == kKpssCriticalValues.end()) {
        throw Error(ErrorCode::invalid_spec, "alpha must be one of 0.10, 0.05, 0.025, 0.01");
    }
    if (x.size() < 8) {
        throw Error(ErrorCode::series_too_short, "ndiffs needs at least 8 observations");
    }
    std::vector<double> y(x.begin(), x.end());
    int d = 0;
    while (d < max_d) {
        if (is_constant(y) || y.size() < 8) {
            break;
        }
        if (kpss_statistic(y, kpss_default_lags(y.size())) <= crit->second) {
            break;
        }
        y = difference(y, 1, 1);
        ++d;
    }
    return d;
}

std::vector<double> difference(std::span<const double> x, std::size_t lag, std::size_t order) {
    if (lag < 1 || order < 1) {
        throw Error(ErrorCode::invalid_spec, "lag and order must be at least 1");
    }
    if (x.size() <= lag * order) {
        throw Error(ErrorCode::series_too_short, "series of length " + std::to_string(x.size()) +
                                                     " too short for lag " + std::to_string(lag) + " order " +
                                                     std::to_string(order));
    }
    std::vector<double> y(x.begin(), x.end());
    for (std::size_t m = 0; m < order; ++m) {
        std::vector<double> next(y.size() - lag);
        for (std::size_t t = lag; t < y.size(); ++t) {
            next[t - lag] = y[t] - y[t - lag];
        }
        y = std::move(next);
    }
    return y;
}

TimeSeries difference(const TimeSeries& series, std::size_t lag, std::size_t order) {
    TimeSeries out;
    out.values = difference(std::span<const double>(series.values), lag, order);
    out.frequency = series.frequency;
    auto [y, p] = time_at(series, static_cast<std::ptrdiff_t>(lag * order));
    out.start_year = y;
    out.start_period = p;
    return out;
}

std::vector<double> integrate(std::span<const double> diffs, std::span<const double> head, std::size_t lag) {
    if (head.size() != lag) {
        throw Error(ErrorCode::invalid_spec, "integration needs exactly `lag` initial values");
    }
    std::vector<double> x(head.begin(), head.end());
    x.reserve(head.size() + diffs.size());
    for (std::size_t i = 0; i < diffs.size(); ++i) {
        x.push_back(diffs[i] + x[i]);
    }
    return x;
}

SeriesPlotData plot_data(const TimeSeries& series, const std::string& label, bool with_mean) {
    SeriesPlotData out;
    out.times = time_labels(series);
    out.values = series.values;
    out.label = label;
    if (with_mean) {
        out.reference_line = mean(series.values);
    }
    return out;
}

double seasonal_strength(std::span<const double> x, int period) {
    const auto n = x.size();
    const auto s = static_cast<std::size_t>(period);
    if (period < 2 || n < 2 * s + 1) {
        return 0.0;
    }
    // Centered moving average of order `period` (2 x period when even).
    const std::size_t half = s / 2;
    std::vector<double> detrended;
    std::vector<std::size_t> position;
    for (std::size_t t = half; t + half < n; ++t) {
        double trend = 0.0;
        if (s % 2 == 0) {
            trend += 0.5 * x[t - half] + 0.5 * x[t + half];
            for (std::size_t j = t - half + 1; j < t + half; ++j) {
                trend += x[j];
            }
        } else {
            for (std::size_t j = t - half; j <= t + half; ++j) {
                trend += x[j];
            }
        }
        trend /= static_cast<double>(s);
        detrended.push_back(x[t] - trend);
        position.push_back(t % s);
    }
    std::vector<double> season_sum(s, 0.0);
    std::vector<std::size_t> season_n(s, 0);
    for (std::size_t i = 0; i < detrended.size(); ++i) {
        season_sum[position[i]] += detrended[i];
        ++season_n[position[i]];
    }
    std::vector<double> seasonal(s);
    for (std::size_t j = 0; j < s; ++j) {
        seasonal[j] = season_n[j] ? season_sum[j] / static_cast<double>(season_n[j]) : 0.0;
    }
    const double centre = mean(seasonal);
    for (auto& v : seasonal) {
        v -= centre;
    }
    std::vector<double> remainder(detrended.size());
    for (std::size_t i = 0; i < detrended.size(); ++i) {
        remainder[i] = detrended[i] - seasonal[position[i]];
    }
    const double var_detrended = sample_variance(detrended);
    if (var_detrended == 0.0) {
        return 0.0;
    }
    return std::max(0.0, 1.0 - sample_variance(remainder) / var_detrended);
}

}  // namespace explore::ts
