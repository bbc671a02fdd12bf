#pragma once

#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "explore/timeseries.hpp"

namespace explore::ts {

/// Orders of a multiplicative (p,d,q)(P,D,Q)_s model. s = 0 means "take the series frequency".
struct ArimaSpec {
    int p = 0;
    int d = 0;
    int q = 0;
    int P = 0;
    int D = 0;
    int Q = 0;
    int s = 0;
    bool include_mean = false;

    int n_coefficients() const noexcept { return p + q + P + Q; }
    friend bool operator==(const ArimaSpec&, const ArimaSpec&) = default;
};

/// Throws invalid_spec when the orders break the search-space bounds.
void validate(const ArimaSpec& spec);

struct ArimaModel {
    ArimaSpec spec;
    std::vector<double> ar;
    std::vector<double> ma;
    std::vector<double> sar;
    std::vector<double> sma;
    std::optional<double> mean;
    double sigma2 = 0.0;
    double loglik = 0.0;
    double aic = 0.0;
    double aicc = 0.0;
    double bic = 0.0;
    /// Length of the differenced series the likelihood was evaluated on.
    std::size_t n_obs = 0;
    std::vector<double> residuals;
    /// Last d + D*s observations of the original series.
    std::vector<double> last_values;
    /// Asymptotic standard errors in ar, ma, sar, sma order; empty if the Hessian was not usable.
    std::vector<double> standard_errors;
    /// Predicted state of the demeaned differenced process after the last observation.
    std::vector<double> final_state;

    // Placement of the fitted series, used to label forecasts.
    int start_year = 1;
    int start_period = 1;
    int frequency = 1;
    std::size_t series_length = 0;

    /// Number of estimated parameters entering the information criteria.
    int n_parameters() const noexcept { return spec.n_coefficients() + 1 + (mean ? 1 : 0); }
};

struct FitOptions {
    bool standard_errors = true;
};

ArimaModel fit_arima(const TimeSeries& series, ArimaSpec spec, const FitOptions& options = {});

struct AutoFitTrace {
    ArimaSpec spec;
    std::optional<double> aicc;
};

/// Stepwise AICc search. Appends every candidate tried to `trace` when given.
ArimaModel auto_fit(const TimeSeries& series, std::vector<AutoFitTrace>* trace = nullptr);

struct PredictionInterval {
    double level = 0.0;
    std::vector<double> lower;
    std::vector<double> upper;
};

struct Forecast {
    std::size_t horizon = 0;
    std::vector<std::string> times;
    std::vector<double> point;
    std::vector<double> std_error;
    std::vector<PredictionInterval> intervals;
};

inline constexpr double kDefaultLevelValues[] = {0.80, 0.95};
inline constexpr std::span<const double> kDefaultLevels{kDefaultLevelValues};

Forecast forecast(const ArimaModel& model, std::size_t horizon, std::span<const double> levels = kDefaultLevels);

LjungBoxResult residual_diagnostics(const ArimaModel& model, std::size_t max_lag);

// Building blocks, exposed for verification.
namespace arma {

/// Lag polynomials in the "1 - sum phi_i B^i" (AR) and "1 + sum theta_i B^i" (MA) conventions,
/// with the seasonal factors multiplied in.
struct Expanded {
    std::vector<double> phi;
    std::vector<double> theta;
};

Expanded expand(std::span<const double> ar, std::span<const double> ma, std::span<const double> sar,
                std::span<const double> sma, int s);

/// Coefficients of (1-B)^d (1-B^s)^D as "1 - sum delta_j B^j"; returns delta_1.. delta_{d+Ds}.
std::vector<double> differencing_polynomial(int d, int D, int s);

/// Maps partial autocorrelations in (-1, 1) to stationary AR coefficients (Durbin-Levinson).
std::vector<double> pacf_to_ar(std::span<const double> pacf);
/// Inverse of pacf_to_ar; nullopt when the coefficients are not stationary.
std::optional<std::vector<double>> ar_to_pacf(std::span<const double> ar);

/// Stationary covariance of the state vector (unit innovation variance).
std::vector<double> initial_state_covariance(std::span<const double> phi, std::span<const double> theta);

struct FilterOutput {
    double sum_log_f = 0.0;
    double sum_sq = 0.0;
    std::size_t n = 0;
    std::optional<double> mean;
    std::vector<double> standardized;
    std::vector<double> final_state;
};

/// Exact Gaussian filter for an ARMA process. With estimate_mean the GLS mean is profiled out;
/// otherwise `fixed_mean` is subtracted.
FilterOutput kalman_filter(std::span<const double> w, std::span<const double> phi, std::span<const double> theta,
                           bool estimate_mean, double fixed_mean = 0.0);

/// Exact log-likelihood at a given innovation variance and mean.
double log_likelihood(std::span<const double> w, std::span<const double> phi, std::span<const double> theta,
                      double sigma2, double mean = 0.0);

/// Roots of 1 + c_1 z + ... + c_k z^k.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> c);

/// Smallest root modulus of 1 + c_1 z + ... ; infinity when the polynomial is constant.
double min_root_modulus(std::span<const double> c);

/// psi weights psi_0..psi_{h-1} of theta(B) / phi(B).
std::vector<double> psi_weights(std::span<const double> phi, std::span<const double> theta, std::size_t h);

}  // namespace arma

}  // namespace explore::ts
