#pragma once

// Independent reference computations and data generators shared by the unit and acceptance suites.
// Nothing here calls into the code paths it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace oracle {

using Rng = std::mt19937_64;

inline std::vector<double> white_noise(Rng& rng, std::size_t n, double sd = 1.0) {
    std::normal_distribution<double> z(0.0, sd);
    std::vector<double> x(n);
    for (auto& v : x) {
        v = z(rng);
    }
    return x;
}

/// x_t = sum phi_i x_{t-i} + e_t + sum theta_j e_{t-j}, with a burn-in discarded.
inline std::vector<double> simulate_arma(Rng& rng, const std::vector<double>& phi, const std::vector<double>& theta,
                                         std::size_t n, double sd = 1.0, std::size_t burn = 500) {
    const auto total = n + burn;
    const auto e = white_noise(rng, total, sd);
    std::vector<double> x(total, 0.0);
    for (std::size_t t = 0; t < total; ++t) {
        double v = e[t];
        for (std::size_t i = 0; i < phi.size(); ++i) {
            if (t >= i + 1) {
                v += phi[i] * x[t - i - 1];
            }
        }
        for (std::size_t j = 0; j < theta.size(); ++j) {
            if (t >= j + 1) {
                v += theta[j] * e[t - j - 1];
            }
        }
        x[t] = v;
    }
    return {x.begin() + static_cast<std::ptrdiff_t>(burn), x.end()};
}

/// Inverts one pass of lag differencing by cumulative summation starting from zeros.
inline std::vector<double> cumulate(const std::vector<double>& w, std::size_t lag, double start = 0.0) {
    std::vector<double> x(lag, start);
    for (std::size_t t = 0; t < w.size(); ++t) {
        x.push_back(w[t] + x[t]);
    }
    return x;
}

inline std::vector<double> random_walk(Rng& rng, std::size_t n) {
    const auto e = white_noise(rng, n);
    std::vector<double> x(n);
    std::partial_sum(e.begin(), e.end(), x.begin());
    return x;
}

/// rho_k by the textbook double sum.
inline double acf_double_sum(const std::vector<double>& x, std::size_t k) {
    const auto n = x.size();
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        den += (x[t] - mean) * (x[t] - mean);
    }
    for (std::size_t t = k; t < n; ++t) {
        num += (x[t] - mean) * (x[t - k] - mean);
    }
    return num / den;
}

/// Q_h = n(n+2) sum rho_k^2 / (n-k) from the double-sum autocorrelations.
inline double ljung_box_q(const std::vector<double>& x, std::size_t h) {
    const double n = static_cast<double>(x.size());
    double q = 0.0;
    for (std::size_t k = 1; k <= h; ++k) {
        const double r = acf_double_sum(x, k);
        q += r * r / (n - static_cast<double>(k));
    }
    return n * (n + 2.0) * q;
}

/// KPSS level statistic: partial sums of demeaned data over n^2 times the Bartlett long-run variance.
inline double kpss_direct(const std::vector<double>& x, std::size_t lags) {
    const auto n = x.size();
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(n);
    std::vector<double> e(n);
    for (std::size_t t = 0; t < n; ++t) {
        e[t] = x[t] - mean;
    }
    double eta = 0.0;
    double s = 0.0;
    for (double v : e) {
        s += v;
        eta += s * s;
    }
    double lrv = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        lrv += e[t] * e[t];
    }
    for (std::size_t j = 1; j <= lags; ++j) {
        double g = 0.0;
        for (std::size_t t = j; t < n; ++t) {
            g += e[t] * e[t - j];
        }
        lrv += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(lags + 1)) * g;
    }
    lrv /= static_cast<double>(n);
    return eta / (static_cast<double>(n) * static_cast<double>(n) * lrv);
}

/// Type-7 quantile from the 1-based order-statistic definition.
inline double quantile_type7(std::vector<double> x, double p) {
    std::sort(x.begin(), x.end());
    const double h = 1.0 + (static_cast<double>(x.size()) - 1.0) * p;
    const auto k = static_cast<std::size_t>(std::floor(h));
    const double gamma = h - std::floor(h);
    if (k >= x.size()) {
        return x.back();
    }
    return x[k - 1] + gamma * (x[k] - x[k - 1]);
}

/// Autocovariances of a stationary ARMA(1,1) x_t = phi x_{t-1} + e_t + theta e_{t-1}.
inline std::vector<double> arma11_autocovariance(double phi, double theta, double sigma2, std::size_t n) {
    std::vector<double> g(n);
    g[0] = sigma2 * (1.0 + 2.0 * phi * theta + theta * theta) / (1.0 - phi * phi);
    if (n > 1) {
        g[1] = sigma2 * (1.0 + phi * theta) * (phi + theta) / (1.0 - phi * phi);
    }
    for (std::size_t h = 2; h < n; ++h) {
        g[h] = phi * g[h - 1];
    }
    return g;
}

/// Multivariate normal log-density of x ~ N(mean, Toeplitz(gamma)) by dense Cholesky.
inline double dense_gaussian_loglik(const std::vector<double>& x, const std::vector<double>& gamma, double mean) {
    const auto n = static_cast<Eigen::Index>(x.size());
    Eigen::MatrixXd S(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            S(i, j) = gamma[static_cast<std::size_t>(std::abs(i - j))];
        }
    }
    Eigen::VectorXd d(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i) = x[static_cast<std::size_t>(i)] - mean;
    }
    Eigen::LLT<Eigen::MatrixXd> llt(S);
    const Eigen::MatrixXd L = llt.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        logdet += 2.0 * std::log(L(i, i));
    }
    const double quad = d.dot(llt.solve(d));
    return -0.5 * (static_cast<double>(n) * std::log(2.0 * M_PI) + logdet + quad);
}

/// Roots of 1 + c_1 z + ... + c_k z^k by Durand-Kerner iteration.
inline std::vector<std::complex<double>> durand_kerner(std::vector<double> c) {
    while (!c.empty() && c.back() == 0.0) {
        c.pop_back();
    }
    const auto k = c.size();
    if (k == 0) {
        return {};
    }
    // Monic coefficients, highest power first: z^k + a_{k-1} z^{k-1} + ... + a_0.
    std::vector<double> a(k + 1);
    a[0] = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        a[i] = (i == k ? 1.0 : c[k - 1 - i]) / c[k - 1];
    }
    auto eval = [&](std::complex<double> z) {
        std::complex<double> v = 1.0;
        for (std::size_t i = 1; i <= k; ++i) {
            v = v * z + a[i];
        }
        return v;
    };
    std::vector<std::complex<double>> roots(k);
    const std::complex<double> seed(0.4, 0.9);
    for (std::size_t i = 0; i < k; ++i) {
        roots[i] = std::pow(seed, static_cast<double>(i)) * 1.5;
    }
    for (int iter = 0; iter < 2000; ++iter) {
        double moved = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            std::complex<double> denom = 1.0;
            for (std::size_t j = 0; j < k; ++j) {
                if (j != i) {
                    denom *= roots[i] - roots[j];
                }
            }
            const auto step = eval(roots[i]) / denom;
            roots[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < 1e-14) {
            break;
        }
    }
    return roots;
}

inline double min_modulus(const std::vector<double>& c) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& z : durand_kerner(c)) {
        best = std::min(best, std::abs(z));
    }
    return best;
}

/// Minimal XML well-formedness check: balanced, properly nested tags, quoted attributes,
/// and only the predefined entities.
inline bool well_formed_xml(std::string_view doc, std::string* why = nullptr) {
    auto fail = [&](const std::string& m) {
        if (why) {
            *why = m;
        }
        return false;
    };
    std::vector<std::string> stack;
    std::size_t i = 0;
    bool seen_root = false;
    auto is_name = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':' || c == '.'; };
    auto check_text = [&](std::string_view t) {
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (t[j] == '<') {
                return false;
            }
            if (t[j] == '&') {
                const auto semi = t.find(';', j);
                if (semi == std::string_view::npos) {
                    return false;
                }
                const auto ent = t.substr(j + 1, semi - j - 1);
                if (ent != "amp" && ent != "lt" && ent != "gt" && ent != "quot" && ent != "apos") {
                    return false;
                }
            }
        }
        return true;
    };
    while (i < doc.size()) {
        const auto lt = doc.find('<', i);
        const auto text = doc.substr(i, (lt == std::string_view::npos ? doc.size() : lt) - i);
        if (!check_text(text)) {
            return fail("bad character data");
        }
        if (stack.empty() && text.find_first_not_of(" \t\r\n") != std::string_view::npos) {
            return fail("text outside root");
        }
        if (lt == std::string_view::npos) {
            break;
        }
        if (doc.substr(lt, 5) == "<?xml") {
            const auto end = doc.find("?>", lt);
            if (end == std::string_view::npos || lt != 0) {
                return fail("bad declaration");
            }
            i = end + 2;
            continue;
        }
        const auto gt = doc.find('>', lt);
        if (gt == std::string_view::npos) {
            return fail("unterminated tag");
        }
        std::string_view tag = doc.substr(lt + 1, gt - lt - 1);
        if (!tag.empty() && tag[0] == '/') {
            const auto name = std::string(tag.substr(1));
            if (stack.empty() || stack.back() != name) {
                return fail("mismatched close </" + name + ">");
            }
            stack.pop_back();
            i = gt + 1;
            continue;
        }
        const bool self_closing = !tag.empty() && tag.back() == '/';
        if (self_closing) {
            tag.remove_suffix(1);
        }
        std::size_t k = 0;
        while (k < tag.size() && is_name(tag[k])) {
            ++k;
        }
        if (k == 0) {
            return fail("empty tag name");
        }
        const std::string name(tag.substr(0, k));
        // Attributes: name="value" pairs.
        std::vector<std::string> attrs;
        while (k < tag.size()) {
            while (k < tag.size() && std::isspace(static_cast<unsigned char>(tag[k]))) {
                ++k;
            }
            if (k >= tag.size()) {
                break;
            }
            const auto start = k;
            while (k < tag.size() && is_name(tag[k])) {
                ++k;
            }
            if (k == start || k >= tag.size() || tag[k] != '=') {
                return fail("bad attribute in <" + name + ">");
            }
            const std::string attr(tag.substr(start, k - start));
            if (std::find(attrs.begin(), attrs.end(), attr) != attrs.end()) {
                return fail("duplicate attribute " + attr);
            }
            attrs.push_back(attr);
            ++k;
            if (k >= tag.size() || (tag[k] != '"' && tag[k] != '\'')) {
                return fail("unquoted attribute");
            }
            const char q = tag[k];
            const auto close = tag.find(q, k + 1);
            if (close == std::string_view::npos || !check_text(tag.substr(k + 1, close - k - 1))) {
                return fail("bad attribute value");
            }
            k = close + 1;
        }
        if (stack.empty()) {
            if (seen_root) {
                return fail("multiple roots");
            }
            seen_root = true;
        }
        if (!self_closing) {
            stack.push_back(name);
        }
        i = gt + 1;
    }
    if (!stack.empty()) {
        return fail("unclosed <" + stack.back() + ">");
    }
    return seen_root ? true : fail("no root element");
}

}  // namespace oracle
