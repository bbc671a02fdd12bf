#pragma once

namespace explore::dist {

/// Regularized lower incomplete gamma P(a, x). Series for x < a + 1, continued fraction otherwise.
double gamma_p(double a, double x);
/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), computed without cancellation.
double gamma_q(double a, double x);

double chi_square_cdf(double x, double df);
/// Upper tail 1 - CDF, accurate for small p-values.
double chi_square_sf(double x, double df);

/// Standard normal CDF via erf(x) = P(1/2, x^2).
double normal_cdf(double x);
/// Inverse standard normal CDF, p in (0, 1).
double normal_quantile(double p);

}  // namespace explore::dist
