#include "explore/arima.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <tuple>

#include "explore/distributions.hpp"
#include "explore/optimize.hpp"

namespace explore::ts {

namespace arma {

namespace {

// Partial autocorrelations are confined to this open interval so that fitted roots stay
// measurably outside the unit circle.
constexpr double kPacfBound = 0.9999;

std::vector<double> multiply_lag_polys(std::span<const double> a, std::span<const double> b, int b_stride) {
    // (1 - sum a_i B^i)(1 - sum b_j B^(j*stride)) in the "1 - sum" convention.
    const std::size_t deg = a.size() + b.size() * static_cast<std::size_t>(b_stride);
    std::vector<double> full(deg + 1, 0.0);
    std::vector<double> pa(a.size() + 1, 0.0);
    pa[0] = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        pa[i + 1] = -a[i];
    }
    std::vector<double> pb(b.size() * static_cast<std::size_t>(b_stride) + 1, 0.0);
    pb[0] = 1.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
        pb[(j + 1) * static_cast<std::size_t>(b_stride)] = -b[j];
    }
    for (std::size_t i = 0; i < pa.size(); ++i) {
        for (std::size_t j = 0; j < pb.size(); ++j) {
            full[i + j] += pa[i] * pb[j];
        }
    }
    std::vector<double> out(deg);
    for (std::size_t i = 1; i <= deg; ++i) {
        out[i - 1] = -full[i];
    }
    return out;
}

std::vector<double> negated(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    for (auto& v : out) {
        v = -v;
    }
    return out;
}

}  // namespace

Expanded expand(std::span<const double> ar, std::span<const double> ma, std::span<const double> sar,
                std::span<const double> sma, int s) {
    Expanded out;
    out.phi = multiply_lag_polys(ar, sar, std::max(s, 1));
    // MA polynomials use "1 + sum", i.e. "1 - sum(-theta)".
    out.theta = negated(multiply_lag_polys(negated(ma), negated(sma), std::max(s, 1)));
    return out;
}

std::vector<double> differencing_polynomial(int d, int D, int s) {
    std::vector<double> delta;
    const std::vector<double> first{1.0};
    for (int i = 0; i < d; ++i) {
        delta = multiply_lag_polys(delta, first, 1);
    }
    const std::vector<double> seasonal{1.0};
    for (int i = 0; i < D; ++i) {
        delta = multiply_lag_polys(delta, seasonal, s);
    }
    return delta;
}

std::vector<double> pacf_to_ar(std::span<const double> pacf) {
    std::vector<double> a;
    for (std::size_t k = 0; k < pacf.size(); ++k) {
        const double r = pacf[k];
        std::vector<double> next(k + 1);
        for (std::size_t j = 0; j < k; ++j) {
            next[j] = a[j] - r * a[k - 1 - j];
        }
        next[k] = r;
        a = std::move(next);
    }
    return a;
}

std::optional<std::vector<double>> ar_to_pacf(std::span<const double> ar) {
    std::vector<double> a(ar.begin(), ar.end());
    std::vector<double> pacf(a.size());
    for (std::size_t k = a.size(); k-- > 0;) {
        const double r = a[k];
        if (!(std::fabs(r) < 1.0)) {
            return std::nullopt;
        }
        pacf[k] = r;
        std::vector<double> prev(k);
        for (std::size_t j = 0; j < k; ++j) {
            prev[j] = (a[j] + r * a[k - 1 - j]) / (1.0 - r * r);
        }
        a = std::move(prev);
    }
    return pacf;
}

namespace {

std::size_t state_dim(std::size_t p, std::size_t q) { return std::max<std::size_t>({p, q + 1, 1}); }

}  // namespace

std::vector<double> initial_state_covariance(std::span<const double> phi, std::span<const double> theta) {
    const auto r = state_dim(phi.size(), theta.size());
    const auto p = phi.size();
    auto phi_at = [&](std::size_t i) { return i >= 1 && i <= p ? phi[i - 1] : 0.0; };
    auto theta_at = [&](std::size_t i) { return i == 0 ? 1.0 : (i <= theta.size() ? theta[i - 1] : 0.0); };

    // psi weights and c_k = sum_{j>=k} theta_j psi_{j-k}, which drive the autocovariance equations.
    const auto psi = psi_weights(phi, theta, r + 1);
    std::vector<double> c(r + 1, 0.0);
    for (std::size_t k = 0; k <= theta.size(); ++k) {
        for (std::size_t j = k; j <= theta.size(); ++j) {
            c[k] += theta_at(j) * psi[j - k];
        }
    }
    // gamma_k - sum_i phi_i gamma_|k-i| = c_k for k = 0..p, then the recursion beyond p.
    std::vector<double> gamma(r + 1, 0.0);
    const auto m = static_cast<Eigen::Index>(p + 1);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd b(m);
    for (std::size_t k = 0; k <= p; ++k) {
        for (std::size_t i = 1; i <= p; ++i) {
            const auto lag = k >= i ? k - i : i - k;
            A(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(lag)) -= phi_at(i);
        }
        b(static_cast<Eigen::Index>(k)) = k < c.size() ? c[k] : 0.0;
    }
    const Eigen::VectorXd g = A.partialPivLu().solve(b);
    for (std::size_t k = 0; k <= std::min(p, r); ++k) {
        gamma[k] = g(static_cast<Eigen::Index>(k));
    }
    for (std::size_t k = p + 1; k <= r; ++k) {
        double v = c[k];
        for (std::size_t i = 1; i <= p; ++i) {
            v += phi_at(i) * gamma[k - i];
        }
        gamma[k] = v;
    }
    if (!(gamma[0] > 0.0) || !std::isfinite(gamma[0])) {
        return {};
    }

    // Row 1: Cov(y_t, a_j,t) with a_j,t = sum_{k>=0} phi_{j+k} y_{t-1-k} + theta_{j-1+k} e_{t-k}.
    std::vector<double> out(r * r, 0.0);
    auto P = [&](std::size_t i, std::size_t j) -> double& { return out[(i - 1) * r + (j - 1)]; };
    std::vector<double> row(r + 2, 0.0);
    row[1] = gamma[0];
    for (std::size_t j = 2; j <= r; ++j) {
        double v = 0.0;
        for (std::size_t k = 0; j + k <= r; ++k) {
            v += phi_at(j + k) * gamma[k + 1] + theta_at(j - 1 + k) * psi[k];
        }
        row[j] = v;
    }
    // Remaining entries from P = T P T' + R R' written elementwise, filled from the bottom-right corner.
    for (std::size_t i = r; i >= 2; --i) {
        for (std::size_t j = r; j >= i; --j) {
            double v = phi_at(i) * phi_at(j) * gamma[0] + theta_at(i - 1) * theta_at(j - 1) +
                       phi_at(i) * row[j + 1] + phi_at(j) * row[i + 1];
            if (i < r && j < r) {
                v += P(i + 1, j + 1);
            }
            P(i, j) = v;
            P(j, i) = v;
        }
    }
    for (std::size_t j = 1; j <= r; ++j) {
        P(1, j) = row[j];
        P(j, 1) = row[j];
    }
    for (double v : out) {
        if (!std::isfinite(v)) {
            return {};
        }
    }
    return out;
}

FilterOutput kalman_filter(std::span<const double> w, std::span<const double> phi, std::span<const double> theta,
                           bool estimate_mean, double fixed_mean) {
    const std::size_t r = state_dim(phi.size(), theta.size());
    const std::size_t n = w.size();
    std::vector<double> phi_full(r, 0.0);
    std::copy(phi.begin(), phi.end(), phi_full.begin());
    std::vector<double> R(r, 0.0);
    R[0] = 1.0;
    std::copy(theta.begin(), theta.end(), R.begin() + 1);

    FilterOutput out;
    out.n = n;
    auto P = initial_state_covariance(phi, theta);
    if (P.empty()) {
        out.sum_sq = std::numeric_limits<double>::infinity();
        return out;
    }

    std::vector<double> a_w(r, 0.0);
    std::vector<double> a_1(r, 0.0);
    std::vector<double> v_w(n), v_1(n), f(n);
    std::vector<double> gain(r), col0(r), next(r * r);
    bool steady = false;

    auto transition = [&](std::vector<double>& a) {
        const double head = a[0];
        for (std::size_t i = 0; i + 1 < r; ++i) {
            a[i] = phi_full[i] * head + a[i + 1];
        }
        a[r - 1] = phi_full[r - 1] * head;
    };

    for (std::size_t t = 0; t < n; ++t) {
        const double F = P[0];
        f[t] = F;
        v_w[t] = (w[t] - fixed_mean) - a_w[0];
        v_1[t] = 1.0 - a_1[0];
        for (std::size_t i = 0; i < r; ++i) {
            gain[i] = P[i * r] / F;
        }
        for (std::size_t i = 0; i < r; ++i) {
            a_w[i] += gain[i] * v_w[t];
            a_1[i] += gain[i] * v_1[t];
        }
        transition(a_w);
        transition(a_1);
        if (steady) {
            continue;
        }
        // P <- T (P - P e1 e1' P / F) T' + R R' in one symmetric pass, exploiting the companion structure:
        // entry (i, j) needs the updated entries (0, 0), (0, j+1), (i+1, 0) and (i+1, j+1).
        auto upd = [&](std::size_t a, std::size_t b) { return P[a * r + b] - P[a * r] * P[b * r] / F; };
        const double u00 = upd(0, 0);
        for (std::size_t i = 0; i < r; ++i) {
            col0[i] = i + 1 < r ? upd(i + 1, 0) : 0.0;
        }
        double change = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            for (std::size_t j = i; j < r; ++j) {
                double v = phi_full[i] * phi_full[j] * u00 + phi_full[i] * col0[j] + phi_full[j] * col0[i] +
                           R[i] * R[j];
                if (j + 1 < r) {
                    v += upd(i + 1, j + 1);
                }
                change = std::max(change, std::fabs(v - P[i * r + j]));
                next[i * r + j] = v;
                next[j * r + i] = v;
            }
        }
        P.swap(next);
        if (change < 1e-14) {
            steady = true;
        }
    }

    double mu = 0.0;
    if (estimate_mean) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t t = 0; t < n; ++t) {
            num += v_w[t] * v_1[t] / f[t];
            den += v_1[t] * v_1[t] / f[t];
        }
        mu = den > 0.0 ? num / den : 0.0;
        out.mean = mu;
    }
    out.standardized.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double v = v_w[t] - mu * v_1[t];
        out.sum_sq += v * v / f[t];
        out.sum_log_f += std::log(f[t]);
        out.standardized[t] = v / std::sqrt(f[t]);
    }
    out.final_state.resize(r);
    for (std::size_t i = 0; i < r; ++i) {
        out.final_state[i] = a_w[i] - (estimate_mean ? mu * a_1[i] : 0.0);
    }
    return out;
}

double log_likelihood(std::span<const double> w, std::span<const double> phi, std::span<const double> theta,
                      double sigma2, double mean) {
    const auto fo = kalman_filter(w, phi, theta, false, mean);
    const double n = static_cast<double>(fo.n);
    return -0.5 * (n * std::log(2.0 * M_PI) + n * std::log(sigma2) + fo.sum_log_f + fo.sum_sq / sigma2);
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> c) {
    std::size_t k = c.size();
    while (k > 0 && c[k - 1] == 0.0) {
        --k;
    }
    if (k == 0) {
        return {};
    }
    // Companion matrix of the monic polynomial z^k + (c_{k-1}/c_k) z^{k-1} + ... + 1/c_k.
    const auto K = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(K, K);
    const double lead = c[k - 1];
    for (Eigen::Index j = 0; j < K; ++j) {
        const double coef = j == 0 ? 1.0 : c[static_cast<std::size_t>(j) - 1];
        companion(0, K - 1 - j) = -coef / lead;
    }
    for (Eigen::Index i = 1; i < K; ++i) {
        companion(i, i - 1) = 1.0;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    std::vector<std::complex<double>> roots;
    for (Eigen::Index i = 0; i < K; ++i) {
        roots.push_back(solver.eigenvalues()(i));
    }
    return roots;
}

double min_root_modulus(std::span<const double> c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : polynomial_roots(c)) {
        best = std::min(best, std::abs(z));
    }
    return best;
}

std::vector<double> psi_weights(std::span<const double> phi, std::span<const double> theta, std::size_t h) {
    std::vector<double> psi(h, 0.0);
    if (h == 0) {
        return psi;
    }
    psi[0] = 1.0;
    for (std::size_t j = 1; j < h; ++j) {
        double v = j <= theta.size() ? theta[j - 1] : 0.0;
        for (std::size_t i = 1; i <= std::min(j, phi.size()); ++i) {
            v += phi[i - 1] * psi[j - i];
        }
        psi[j] = v;
    }
    return psi;
}

}  // namespace arma

namespace {

using arma::Expanded;

struct Blocks {
    std::vector<double> ar, ma, sar, sma;
};

// Unconstrained vector -> coefficient blocks through tanh-bounded partial autocorrelations.
Blocks to_blocks(const std::vector<double>& u, const ArimaSpec& spec) {
    std::size_t pos = 0;
    auto take = [&](int count, bool moving_average) {
        std::vector<double> pacf(static_cast<std::size_t>(count));
        for (auto& v : pacf) {
            v = arma::kPacfBound * std::tanh(u[pos++]);
        }
        auto coef = arma::pacf_to_ar(pacf);
        if (moving_average) {
            for (auto& c : coef) {
                c = -c;
            }
        }
        return coef;
    };
    Blocks b;
    b.ar = take(spec.p, false);
    b.ma = take(spec.q, true);
    b.sar = take(spec.P, false);
    b.sma = take(spec.Q, true);
    return b;
}

// Inverse of to_blocks for one block; nullopt if the block is outside the admissible region.
std::optional<std::vector<double>> to_unconstrained(std::span<const double> coef, bool moving_average) {
    std::vector<double> stationary_form(coef.begin(), coef.end());
    if (moving_average) {
        for (auto& c : stationary_form) {
            c = -c;
        }
    }
    auto pacf = arma::ar_to_pacf(stationary_form);
    if (!pacf) {
        return std::nullopt;
    }
    std::vector<double> u;
    for (double r : *pacf) {
        const double scaled = std::clamp(r / arma::kPacfBound, -0.999, 0.999);
        u.push_back(std::atanh(scaled));
    }
    return u;
}

// Shrinks a block towards zero until it is admissible.
std::vector<double> admissible_start(std::vector<double> coef, bool moving_average) {
    for (int attempt = 0; attempt < 60; ++attempt) {
        if (auto u = to_unconstrained(coef, moving_average)) {
            return *u;
        }
        for (std::size_t j = 0; j < coef.size(); ++j) {
            coef[j] *= std::pow(0.9, static_cast<double>(j + 1));
        }
    }
    return std::vector<double>(coef.size(), 0.0);
}

std::vector<double> apply_differencing(std::span<const double> x, std::span<const double> delta) {
    const auto k = delta.size();
    std::vector<double> w;
    w.reserve(x.size() - k);
    for (std::size_t t = k; t < x.size(); ++t) {
        double v = x[t];
        for (std::size_t j = 0; j < k; ++j) {
            v -= delta[j] * x[t - 1 - j];
        }
        w.push_back(v);
    }
    return w;
}

struct Problem {
    std::vector<double> w;
    ArimaSpec spec;

    double objective_from_blocks(const Blocks& b) const {
        const auto e = arma::expand(b.ar, b.ma, b.sar, b.sma, spec.s);
        const auto fo = arma::kalman_filter(w, e.phi, e.theta, spec.include_mean);
        const double n = static_cast<double>(fo.n);
        const double sigma2 = fo.sum_sq / n;
        if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) {
            return std::numeric_limits<double>::infinity();
        }
        return 0.5 * (n * std::log(2.0 * M_PI * sigma2) + fo.sum_log_f + n);
    }

    double objective(const std::vector<double>& u) const { return objective_from_blocks(to_blocks(u, spec)); }
};

// Yule-Walker AR(m) by Levinson-Durbin on the sample autocovariances.
std::vector<double> yule_walker(std::span<const double> x, std::size_t m) {
    const auto n = x.size();
    std::vector<double> gamma(m + 1, 0.0);
    for (std::size_t k = 0; k <= m; ++k) {
        for (std::size_t t = k; t < n; ++t) {
            gamma[k] += x[t] * x[t - k];
        }
        gamma[k] /= static_cast<double>(n);
    }
    std::vector<double> a;
    double v = gamma[0];
    if (v <= 0.0) {
        return std::vector<double>(m, 0.0);
    }
    for (std::size_t k = 1; k <= m; ++k) {
        double acc = gamma[k];
        for (std::size_t j = 1; j < k; ++j) {
            acc -= a[j - 1] * gamma[k - j];
        }
        const double r = acc / v;
        std::vector<double> next(k);
        for (std::size_t j = 1; j < k; ++j) {
            next[j - 1] = a[j - 1] - r * a[k - j - 1];
        }
        next[k - 1] = r;
        a = std::move(next);
        v *= (1.0 - r * r);
        if (v <= 0.0) {
            break;
        }
    }
    a.resize(m, 0.0);
    return a;
}

// Hannan-Rissanen: long autoregression for innovations, then least squares on lagged values and innovations.
std::optional<Blocks> hannan_rissanen(std::span<const double> w_raw, const ArimaSpec& spec) {
    const auto n = w_raw.size();
    const double m0 = std::accumulate(w_raw.begin(), w_raw.end(), 0.0) / static_cast<double>(n);
    std::vector<double> w(n);
    for (std::size_t t = 0; t < n; ++t) {
        w[t] = w_raw[t] - m0;
    }
    const auto s = static_cast<std::size_t>(std::max(spec.s, 1));
    const std::size_t max_ar_lag = static_cast<std::size_t>(spec.p) + static_cast<std::size_t>(spec.P) * s;
    const std::size_t max_ma_lag = static_cast<std::size_t>(spec.q) + static_cast<std::size_t>(spec.Q) * s;
    std::vector<double> e(n, 0.0);
    std::size_t first = max_ar_lag;
    if (max_ma_lag > 0) {
        const std::size_t m = std::min<std::size_t>(n / 3, std::max<std::size_t>(max_ar_lag, max_ma_lag) + 10);
        if (m < 1) {
            return std::nullopt;
        }
        const auto a = yule_walker(w, m);
        for (std::size_t t = m; t < n; ++t) {
            double v = w[t];
            for (std::size_t j = 0; j < m; ++j) {
                v -= a[j] * w[t - 1 - j];
            }
            e[t] = v;
        }
        first = m + std::max(max_ar_lag, max_ma_lag);
    }
    const auto cols = static_cast<std::size_t>(spec.n_coefficients());
    if (cols == 0 || first >= n || n - first < cols + 5) {
        return std::nullopt;
    }
    const auto rows = n - first;
    Eigen::MatrixXd X(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::size_t t = first + i;
        const auto ri = static_cast<Eigen::Index>(i);
        y(ri) = w[t];
        Eigen::Index c = 0;
        for (int j = 1; j <= spec.p; ++j) {
            X(ri, c++) = w[t - static_cast<std::size_t>(j)];
        }
        for (int j = 1; j <= spec.q; ++j) {
            X(ri, c++) = e[t - static_cast<std::size_t>(j)];
        }
        for (int j = 1; j <= spec.P; ++j) {
            X(ri, c++) = w[t - static_cast<std::size_t>(j) * s];
        }
        for (int j = 1; j <= spec.Q; ++j) {
            X(ri, c++) = e[t - static_cast<std::size_t>(j) * s];
        }
    }
    const Eigen::VectorXd beta = X.colPivHouseholderQr().solve(y);
    if (!beta.allFinite()) {
        return std::nullopt;
    }
    Blocks b;
    Eigen::Index c = 0;
    for (int j = 0; j < spec.p; ++j) {
        b.ar.push_back(beta(c++));
    }
    for (int j = 0; j < spec.q; ++j) {
        b.ma.push_back(beta(c++));
    }
    for (int j = 0; j < spec.P; ++j) {
        b.sar.push_back(beta(c++));
    }
    for (int j = 0; j < spec.Q; ++j) {
        b.sma.push_back(beta(c++));
    }
    return b;
}

std::vector<double> unconstrained_start(const Blocks& b) {
    std::vector<double> u;
    for (auto&& [coef, ma] : {std::pair{&b.ar, false}, std::pair{&b.ma, true}, std::pair{&b.sar, false},
                              std::pair{&b.sma, true}}) {
        auto part = admissible_start(*coef, ma);
        u.insert(u.end(), part.begin(), part.end());
    }
    return u;
}

std::vector<double> flatten(const Blocks& b) {
    std::vector<double> out;
    for (const auto* v : {&b.ar, &b.ma, &b.sar, &b.sma}) {
        out.insert(out.end(), v->begin(), v->end());
    }
    return out;
}

Blocks unflatten(std::span<const double> c, const ArimaSpec& spec) {
    Blocks b;
    std::size_t pos = 0;
    auto take = [&](int count, std::vector<double>& dst) {
        for (int i = 0; i < count; ++i) {
            dst.push_back(c[pos++]);
        }
    };
    take(spec.p, b.ar);
    take(spec.q, b.ma);
    take(spec.P, b.sar);
    take(spec.Q, b.sma);
    return b;
}

std::vector<double> negated_copy(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    for (auto& v : out) {
        v = -v;
    }
    return out;
}

bool admissible(const Blocks& b) {
    return arma::ar_to_pacf(b.ar) && arma::ar_to_pacf(b.sar) && arma::ar_to_pacf(negated_copy(b.ma)) &&
           arma::ar_to_pacf(negated_copy(b.sma));
}

// Standard errors from a central-difference Hessian of the profile negative log-likelihood
// in coefficient space.
std::vector<double> standard_errors(const Problem& problem, const Blocks& at) {
    const auto c0 = flatten(at);
    const auto k = c0.size();
    if (k == 0) {
        return {};
    }
    auto g = [&](const std::vector<double>& c) {
        const auto b = unflatten(c, problem.spec);
        if (!admissible(b)) {
            return std::numeric_limits<double>::quiet_NaN();
        }
        return problem.objective_from_blocks(b);
    };
    const double h = 1e-4;
    const double f0 = g(c0);
    Eigen::MatrixXd H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i; j < k; ++j) {
            double value = 0.0;
            if (i == j) {
                auto up = c0, down = c0;
                up[i] += h;
                down[i] -= h;
                value = (g(up) - 2.0 * f0 + g(down)) / (h * h);
            } else {
                auto pp = c0, pm = c0, mp = c0, mm = c0;
                pp[i] += h, pp[j] += h;
                pm[i] += h, pm[j] -= h;
                mp[i] -= h, mp[j] += h;
                mm[i] -= h, mm[j] -= h;
                value = (g(pp) - g(pm) - g(mp) + g(mm)) / (4.0 * h * h);
            }
            if (!std::isfinite(value)) {
                return {};
            }
            H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = value;
            H(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = value;
        }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
        return {};
    }
    const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(H.rows(), H.cols()));
    std::vector<double> se;
    for (Eigen::Index i = 0; i < cov.rows(); ++i) {
        if (!(cov(i, i) > 0.0)) {
            return {};
        }
        se.push_back(std::sqrt(cov(i, i)));
    }
    return se;
}

ArimaSpec resolve(const TimeSeries& series, ArimaSpec spec) {
    validate(spec);
    if (spec.s == 0) {
        spec.s = series.frequency;
    }
    if ((spec.P > 0 || spec.D > 0 || spec.Q > 0) && spec.s <= 1) {
        throw Error(ErrorCode::invalid_spec, "seasonal orders need a seasonal period above 1");
    }
    if (spec.P == 0 && spec.D == 0 && spec.Q == 0 && spec.s < 1) {
        spec.s = 1;
    }
    return spec;
}

}  // namespace

void validate(const ArimaSpec& spec) {
    if (spec.p < 0 || spec.d < 0 || spec.q < 0 || spec.P < 0 || spec.D < 0 || spec.Q < 0 || spec.s < 0) {
        throw Error(ErrorCode::invalid_spec, "model orders must be non-negative");
    }
    if (spec.n_coefficients() > 10) {
        throw Error(ErrorCode::invalid_spec, "p + q + P + Q must not exceed 10");
    }
    if (spec.d + spec.D > 3) {
        throw Error(ErrorCode::invalid_spec, "d + D must not exceed 3");
    }
    if (spec.include_mean && spec.d + spec.D > 0) {
        throw Error(ErrorCode::invalid_spec, "a mean term is only available when d = D = 0");
    }
}

ArimaModel fit_arima(const TimeSeries& series, ArimaSpec spec_in, const FitOptions& options) {
    validate(series);
    const auto spec = resolve(series, spec_in);
    const auto n = series.size();
    const auto diff_len = static_cast<std::size_t>(spec.d + spec.D * spec.s);
    const auto needed = static_cast<std::size_t>(spec.p + spec.q + (spec.P + spec.Q) * spec.s + 5);
    if (n < diff_len || n - diff_len < needed) {
        throw Error(ErrorCode::too_few_observations,
                    "series of length " + std::to_string(n) + " is too short for this model (needs " +
                        std::to_string(diff_len + needed) + ")",
                    {{"needed", diff_len + needed}, {"length", n}});
    }

    const auto delta = arma::differencing_polynomial(spec.d, spec.D, spec.s);
    Problem problem{apply_differencing(series.values, delta), spec};
    std::vector<std::vector<double>> starts;
    const auto k = static_cast<std::size_t>(spec.n_coefficients());
    starts.emplace_back(k, 0.0);
    if (k > 0) {
        if (auto hr = hannan_rissanen(problem.w, spec)) {
            starts.push_back(unconstrained_start(*hr));
        }
    }

    opt::NelderMeadOptions nm;
    nm.max_evaluations = 4000 + 1500 * k;
    std::optional<opt::NelderMeadResult> best;
    bool any_converged = false;
    auto consider = [&](const std::vector<double>& start) {
        auto r = opt::nelder_mead([&](const std::vector<double>& u) { return problem.objective(u); }, start, nm);
        any_converged = any_converged || (r.converged && std::isfinite(r.value));
        if (!best || r.value < best->value) {
            best = std::move(r);
        }
    };
    bool finite_start = false;
    for (const auto& s : starts) {
        if (std::isfinite(problem.objective(s))) {
            finite_start = true;
            consider(s);
        }
    }
    if (!finite_start) {
        throw Error(ErrorCode::non_invertible_start, "no admissible starting point gives a finite likelihood");
    }
    if (k > 0) {
        // Perturbed restart around the incumbent.
        auto perturbed = best->x;
        for (std::size_t i = 0; i < perturbed.size(); ++i) {
            perturbed[i] += (i % 2 == 0 ? 0.3 : -0.3);
        }
        if (std::isfinite(problem.objective(perturbed))) {
            consider(perturbed);
        }
    }
    if (!best || !std::isfinite(best->value) || !any_converged) {
        throw Error(ErrorCode::non_convergence, "likelihood optimization did not converge");
    }

    const auto blocks = to_blocks(best->x, spec);
    const auto e = arma::expand(blocks.ar, blocks.ma, blocks.sar, blocks.sma, spec.s);
    const auto fo = arma::kalman_filter(problem.w, e.phi, e.theta, spec.include_mean);

    ArimaModel m;
    m.spec = spec;
    m.ar = blocks.ar;
    m.ma = blocks.ma;
    m.sar = blocks.sar;
    m.sma = blocks.sma;
    m.mean = fo.mean;
    m.n_obs = fo.n;
    const double nobs = static_cast<double>(fo.n);
    m.sigma2 = fo.sum_sq / nobs;
    m.loglik = -0.5 * (nobs * std::log(2.0 * M_PI * m.sigma2) + fo.sum_log_f + nobs);
    const double kp = static_cast<double>(m.n_parameters());
    m.aic = -2.0 * m.loglik + 2.0 * kp;
    m.aicc = nobs - kp - 1.0 > 0.0 ? m.aic + 2.0 * kp * (kp + 1.0) / (nobs - kp - 1.0)
                                   : std::numeric_limits<double>::infinity();
    m.bic = -2.0 * m.loglik + kp * std::log(nobs);
    m.residuals = fo.standardized;
    m.final_state = fo.final_state;
    m.last_values.assign(series.values.end() - static_cast<std::ptrdiff_t>(diff_len), series.values.end());
    m.start_year = series.start_year;
    m.start_period = series.start_period;
    m.frequency = series.frequency;
    m.series_length = n;
    if (options.standard_errors) {
        m.standard_errors = standard_errors(problem, blocks);
    }
    return m;
}

ArimaModel auto_fit(const TimeSeries& series, std::vector<AutoFitTrace>* trace) {
    validate(series);
    const auto n = series.size();
    if (n < 20) {
        throw Error(ErrorCode::too_few_observations, "automatic model selection needs at least 20 observations",
                    {{"needed", 20}, {"length", n}});
    }
    const int s = series.frequency;
    const bool seasonal = s > 1 && n >= static_cast<std::size_t>(2 * s + 8);
    const int D = seasonal && seasonal_strength(series.values, s) > 0.64 ? 1 : 0;
    const auto base = D == 1 ? difference(std::span<const double>(series.values), static_cast<std::size_t>(s), 1)
                             : series.values;
    const int d = base.size() >= 8 ? ndiffs(base) : 0;

    using Key = std::tuple<int, int, int, int>;
    std::map<Key, std::optional<ArimaModel>> fitted;
    FitOptions quick;
    quick.standard_errors = false;

    auto try_fit = [&](int p, int q, int P, int Q) -> const std::optional<ArimaModel>& {
        const Key key{p, q, P, Q};
        if (auto it = fitted.find(key); it != fitted.end()) {
            return it->second;
        }
        ArimaSpec spec{p, d, q, P, D, Q, seasonal ? s : 1, d + D == 0};
        std::optional<ArimaModel> result;
        try {
            result = fit_arima(series, spec, quick);
        } catch (const Error&) {
            result.reset();
        }
        if (trace) {
            trace->push_back({spec, result ? std::optional<double>(result->aicc) : std::nullopt});
        }
        return fitted.emplace(key, std::move(result)).first->second;
    };

    const std::vector<std::pair<int, int>> starts{{0, 0}, {1, 0}, {0, 1}, {2, 2}};
    std::vector<std::pair<int, int>> seasonal_starts{{0, 0}};
    if (seasonal) {
        seasonal_starts = {{0, 0}, {1, 0}, {0, 1}};
    }
    std::optional<Key> best;
    double best_aicc = std::numeric_limits<double>::infinity();
    for (auto [p, q] : starts) {
        for (auto [P, Q] : seasonal_starts) {
            const auto& m = try_fit(p, q, P, Q);
            if (m && m->aicc < best_aicc) {
                best_aicc = m->aicc;
                best = Key{p, q, P, Q};
            }
        }
    }
    if (!best) {
        throw Error(ErrorCode::non_convergence, "no candidate model could be fitted");
    }

    constexpr int max_p = 5, max_q = 5, max_P = 2, max_Q = 2;
    for (bool improved = true; improved;) {
        improved = false;
        const auto [p0, q0, P0, Q0] = *best;
        std::vector<Key> neighbours;
        for (int delta : {-1, 1}) {
            neighbours.emplace_back(p0 + delta, q0, P0, Q0);
            neighbours.emplace_back(p0, q0 + delta, P0, Q0);
            if (seasonal) {
                neighbours.emplace_back(p0, q0, P0 + delta, Q0);
                neighbours.emplace_back(p0, q0, P0, Q0 + delta);
            }
        }
        Key round_best = *best;
        for (const auto& [p, q, P, Q] : neighbours) {
            if (p < 0 || q < 0 || P < 0 || Q < 0 || p > max_p || q > max_q || P > max_P || Q > max_Q ||
                p + q + P + Q > 10) {
                continue;
            }
            const auto& m = try_fit(p, q, P, Q);
            if (m && m->aicc < best_aicc - 1e-9) {
                best_aicc = m->aicc;
                round_best = Key{p, q, P, Q};
                improved = true;
            }
        }
        best = round_best;
    }

    const auto& chosen = fitted.at(*best);
    try {
        return fit_arima(series, chosen->spec);
    } catch (const Error&) {
        return *chosen;
    }
}

Forecast forecast(const ArimaModel& model, std::size_t horizon, std::span<const double> levels) {
    if (horizon < 1) {
        throw Error(ErrorCode::horizon_out_of_range, "forecast horizon must be at least 1", {{"horizon", horizon}});
    }
    for (double level : levels) {
        if (!(level > 0.0 && level < 1.0)) {
            throw Error(ErrorCode::invalid_spec, "prediction interval levels must lie in (0, 1)");
        }
    }
    const auto& spec = model.spec;
    const auto e = arma::expand(model.ar, model.ma, model.sar, model.sma, spec.s);
    const auto delta = arma::differencing_polynomial(spec.d, spec.D, spec.s);

    // Differenced-scale forecasts from the final filtered state.
    auto state = model.final_state;
    const auto r = state.size();
    std::vector<double> phi_full(r, 0.0);
    std::copy(e.phi.begin(), e.phi.end(), phi_full.begin());
    std::vector<double> history = model.last_values;
    Forecast out;
    out.horizon = horizon;
    for (std::size_t h = 0; h < horizon; ++h) {
        double value = state[0] + model.mean.value_or(0.0);
        const double head = state[0];
        for (std::size_t i = 0; i + 1 < r; ++i) {
            state[i] = phi_full[i] * head + state[i + 1];
        }
        state[r - 1] = phi_full[r - 1] * head;
        // Undo the differencing: x_t = w_t + sum delta_j x_{t-j}.
        for (std::size_t j = 0; j < delta.size(); ++j) {
            value += delta[j] * history[history.size() - 1 - j];
        }
        history.push_back(value);
        out.point.push_back(value);
    }

    // Integrated AR polynomial phi(B) * Delta(B) in the "1 - sum" convention.
    std::vector<double> full_phi(e.phi.size() + delta.size(), 0.0);
    {
        std::vector<double> a(e.phi.size() + 1, 0.0), b(delta.size() + 1, 0.0), prod(full_phi.size() + 1, 0.0);
        a[0] = b[0] = 1.0;
        for (std::size_t i = 0; i < e.phi.size(); ++i) {
            a[i + 1] = -e.phi[i];
        }
        for (std::size_t i = 0; i < delta.size(); ++i) {
            b[i + 1] = -delta[i];
        }
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                prod[i + j] += a[i] * b[j];
            }
        }
        for (std::size_t i = 0; i < full_phi.size(); ++i) {
            full_phi[i] = -prod[i + 1];
        }
    }
    const auto psi = arma::psi_weights(full_phi, e.theta, horizon);
    double cumulative = 0.0;
    for (std::size_t h = 0; h < horizon; ++h) {
        cumulative += psi[h] * psi[h];
        out.std_error.push_back(std::sqrt(model.sigma2 * cumulative));
    }
    for (double level : levels) {
        PredictionInterval pi;
        pi.level = level;
        const double z = dist::normal_quantile(0.5 + level / 2.0);
        for (std::size_t h = 0; h < horizon; ++h) {
            pi.lower.push_back(out.point[h] - z * out.std_error[h]);
            pi.upper.push_back(out.point[h] + z * out.std_error[h]);
        }
        out.intervals.push_back(std::move(pi));
    }
    TimeSeries placement{{}, model.start_year, model.start_period, model.frequency};
    for (std::size_t h = 0; h < horizon; ++h) {
        auto [y, p] = time_at(placement, static_cast<std::ptrdiff_t>(model.series_length + h));
        out.times.push_back(time_label(y, p, model.frequency));
    }
    return out;
}

LjungBoxResult residual_diagnostics(const ArimaModel& model, std::size_t max_lag) {
    const auto fitdf = static_cast<std::size_t>(model.spec.n_coefficients());
    if (max_lag <= fitdf) {
        throw Error(ErrorCode::lag_out_of_range, "max_lag must exceed the number of fitted coefficients (" +
                                                     std::to_string(fitdf) + ")");
    }
    return ljung_box(model.residuals, max_lag, fitdf);
}

}  // namespace explore::ts
