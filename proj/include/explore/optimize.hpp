#pragma once

#include <functional>
#include <vector>

namespace explore::opt {

struct NelderMeadOptions {
    double initial_step = 0.5;
    double f_tolerance = 1e-10;
    double x_tolerance = 1e-6;
    /// Converged regardless of simplex size once the value spread falls below this (relative).
    double flat_tolerance = 1e-12;
    std::size_t max_evaluations = 20000;
    /// Fresh-simplex restarts from the incumbent after convergence.
    int restarts = 2;
};

struct NelderMeadResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
    bool converged = false;
};

/// Derivative-free minimization. Non-finite objective values are treated as +infinity.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                             const NelderMeadOptions& options = {});

}  // namespace explore::opt
