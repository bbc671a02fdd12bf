#include "explore/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace explore::dist {

namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;

double series_p(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) {
            break;
        }
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
double continued_fraction_q(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) {
            d = tiny;
        }
        c = b + an / c;
        if (std::fabs(c) < tiny) {
            c = tiny;
        }
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) {
            break;
        }
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (a <= 0.0 || x < 0.0 || std::isnan(x)) {
        throw std::invalid_argument("gamma_p: requires a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    if (x < a + 1.0) {
        return series_p(a, x);
    }
    return 1.0 - continued_fraction_q(a, x);
}

double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0 || std::isnan(x)) {
        throw std::invalid_argument("gamma_q: requires a > 0 and x >= 0");
    }
    if (x == 0.0) {
        return 1.0;
    }
    if (std::isinf(x)) {
        return 0.0;
    }
    if (x < a + 1.0) {
        return 1.0 - series_p(a, x);
    }
    return continued_fraction_q(a, x);
}

double chi_square_cdf(double x, double df) {
    if (x <= 0.0) {
        return 0.0;
    }
    return gamma_p(df / 2.0, x / 2.0);
}

double chi_square_sf(double x, double df) {
    if (x <= 0.0) {
        return 1.0;
    }
    return gamma_q(df / 2.0, x / 2.0);
}

double normal_cdf(double x) {
    const double half_tail = 0.5 * gamma_q(0.5, 0.5 * x * x);
    return x >= 0.0 ? 1.0 - half_tail : half_tail;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("normal_quantile: p must lie in (0, 1)");
    }
    if (p == 0.5) {
        return 0.0;
    }
    // Bracket, then Newton steps safeguarded by bisection.
    double lo = -40.0;
    double hi = 40.0;
    double x = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double f = normal_cdf(x) - p;
        if (f > 0.0) {
            hi = x;
        } else {
            lo = x;
        }
        const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
        double next = x - f / pdf;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = 0.5 * (lo + hi);
        }
        if (std::fabs(next - x) <= 1e-15 * std::max(1.0, std::fabs(x))) {
            return next;
        }
        x = next;
    }
    return x;
}

}  // namespace explore::dist
