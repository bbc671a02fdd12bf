#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "explore/charts.hpp"
#include "explore/table.hpp"

namespace explore::ts {

/// Equally spaced observations. Period numbering is 1-based within a year.
struct TimeSeries {
    std::vector<double> values;
    int start_year = 1;
    int start_period = 1;
    int frequency = 1;

    std::size_t size() const noexcept { return values.size(); }
};

/// Validates the TimeSeries invariants (non-empty, finite, frequency in {1,4,12}, start period in range).
void validate(const TimeSeries& series);

/// Year and period of the observation `offset` steps after the start.
std::pair<int, int> time_at(const TimeSeries& series, std::ptrdiff_t offset);
/// "2001-03" for monthly, "2001 Q2" for quarterly, "2001" for annual.
std::string time_label(int year, int period, int frequency);
std::vector<std::string> time_labels(const TimeSeries& series);

struct DateColumnTime {
    std::string date_col;
};
struct YearPeriodTime {
    std::string year_col;
    /// Absent for annual data.
    std::optional<std::string> period_col;
};
struct ExplicitTime {
    int start_year = 1;
    int start_period = 1;
    int frequency = 1;
};

struct SeriesSpec {
    std::string value_col;
    std::variant<DateColumnTime, YearPeriodTime, ExplicitTime> time = ExplicitTime{};
    /// Overrides the inferred frequency for column-based layouts.
    std::optional<int> frequency;
};

TimeSeries build_series(const Table& table, const SeriesSpec& spec);

/// Sample autocorrelations rho_1..rho_h (rho_0 = 1 is not included).
std::vector<double> acf(std::span<const double> x, std::size_t max_lag);

struct LjungBoxEntry {
    std::size_t lag = 0;
    double rho = 0.0;
    double q = 0.0;
    std::size_t df = 0;
    /// Absent when df is zero.
    std::optional<double> p_value;
};

struct LjungBoxResult {
    std::size_t fitdf = 0;
    std::vector<LjungBoxEntry> entries;
};

LjungBoxResult ljung_box(std::span<const double> x, std::size_t max_lag, std::size_t fitdf = 0);

/// Level-stationarity critical values, keyed by significance level.
inline const std::map<double, double> kKpssCriticalValues{{0.10, 0.347}, {0.05, 0.463}, {0.025, 0.574}, {0.01, 0.739}};

struct KpssResult {
    double statistic = 0.0;
    std::size_t lag_truncation = 0;
    std::map<double, double> critical_values = kKpssCriticalValues;
    bool reject_at_5pct = false;
};

/// floor(4 (n/100)^(1/4))
std::size_t kpss_default_lags(std::size_t n);

/// KPSS level statistic at an explicit Bartlett truncation. Needs n >= 2 and a non-constant series.
double kpss_statistic(std::span<const double> x, std::size_t lags);

/// Full test at the default truncation. Throws series_too_short for n < 8, constant_series for zero variance.
KpssResult kpss_test(std::span<const double> x);

/// True when the series has (numerically) zero spread.
bool is_constant(std::span<const double> x);

/// Sequential KPSS differencing order; alpha must be one of the tabulated levels.
int ndiffs(std::span<const double> x, double alpha = 0.05, int max_d = 2);

/// m-fold lag differencing of raw values.
std::vector<double> difference(std::span<const double> x, std::size_t lag, std::size_t order = 1);
TimeSeries difference(const TimeSeries& series, std::size_t lag, std::size_t order = 1);

/// Inverse of one lag-differencing pass: rebuilds x from its first `lag` values and the differences.
std::vector<double> integrate(std::span<const double> diffs, std::span<const double> head, std::size_t lag);

/// Plot payload for a series with its mean as reference line.
SeriesPlotData plot_data(const TimeSeries& series, const std::string& label, bool with_mean);

/// Seasonal strength max(0, 1 - Var(remainder) / Var(detrended)) from a moving-average decomposition.
double seasonal_strength(std::span<const double> x, int period);

}  // namespace explore::ts
