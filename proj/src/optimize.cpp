#include "explore/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace explore::opt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Simplex {
    std::vector<std::vector<double>> x;
    std::vector<double> f;
};

// One Nelder-Mead run with the standard reflection/expansion/contraction/shrink coefficients.
NelderMeadResult run(const std::function<double(const std::vector<double>&)>& objective, const std::vector<double>& start,
                     double step, const NelderMeadOptions& options, std::size_t budget) {
    const std::size_t n = start.size();
    std::size_t evals = 0;
    auto f = [&](const std::vector<double>& x) {
        ++evals;
        const double v = objective(x);
        return std::isfinite(v) ? v : kInf;
    };

    Simplex s;
    s.x.push_back(start);
    for (std::size_t i = 0; i < n; ++i) {
        auto v = start;
        v[i] += step;
        s.x.push_back(std::move(v));
    }
    for (const auto& v : s.x) {
        s.f.push_back(f(v));
    }

    std::vector<std::size_t> order(n + 1);
    bool converged = false;
    while (evals < budget) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return s.f[a] < s.f[b]; });
        const auto best = order.front();
        const auto worst = order.back();
        const auto second = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                diameter = std::max(diameter, std::fabs(s.x[i][j] - s.x[best][j]));
            }
        }
        const double spread = s.f[worst] - s.f[best];
        if (std::isfinite(s.f[worst]) && spread <= options.f_tolerance * (std::fabs(s.f[best]) + options.f_tolerance) &&
            (diameter <= options.x_tolerance || spread <= options.flat_tolerance * (std::fabs(s.f[best]) + 1.0))) {
            converged = true;
            break;
        }

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                centroid[j] += s.x[i][j] / static_cast<double>(n);
            }
        }
        auto along = [&](double t) {
            std::vector<double> v(n);
            for (std::size_t j = 0; j < n; ++j) {
                v[j] = centroid[j] + t * (s.x[worst][j] - centroid[j]);
            }
            return v;
        };

        auto xr = along(-1.0);
        const double fr = f(xr);
        if (fr < s.f[best]) {
            auto xe = along(-2.0);
            const double fe = f(xe);
            if (fe < fr) {
                s.x[worst] = std::move(xe);
                s.f[worst] = fe;
            } else {
                s.x[worst] = std::move(xr);
                s.f[worst] = fr;
            }
            continue;
        }
        if (fr < s.f[second]) {
            s.x[worst] = std::move(xr);
            s.f[worst] = fr;
            continue;
        }
        const bool outside = fr < s.f[worst];
        auto xc = along(outside ? -0.5 : 0.5);
        const double fc = f(xc);
        if (fc < (outside ? fr : s.f[worst])) {
            s.x[worst] = std::move(xc);
            s.f[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t j = 0; j < n; ++j) {
                s.x[i][j] = s.x[best][j] + 0.5 * (s.x[i][j] - s.x[best][j]);
            }
            s.f[i] = f(s.x[i]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(s.f.begin(), s.f.end()) - s.f.begin());
    return {s.x[best], s.f[best], evals, converged};
}

}  // namespace

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                             const NelderMeadOptions& options) {
    if (start.empty()) {
        const double v = f(start);
        return {start, std::isfinite(v) ? v : kInf, 1, std::isfinite(v)};
    }
    auto result = run(f, start, options.initial_step, options, options.max_evaluations);
    double step = options.initial_step;
    for (int r = 0; r < options.restarts && result.evaluations < options.max_evaluations; ++r) {
        step *= 0.2;
        auto again = run(f, result.x, std::max(step, 1e-3), options, options.max_evaluations - result.evaluations);
        const bool improved = again.value < result.value - 1e-9 * (std::fabs(result.value) + 1.0);
        again.evaluations += result.evaluations;
        if (again.value <= result.value) {
            again.converged = again.converged || result.converged;
            result = std::move(again);
        } else {
            result.evaluations = again.evaluations;
        }
        if (!improved) {
            break;
        }
    }
    return result;
}

}  // namespace explore::opt
