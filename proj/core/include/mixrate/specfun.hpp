#pragma once

namespace mixrate {

// ln Gamma(x) for x > 0. Relative error <= 1e-12 on [1e-6, 1e8].
// Throws std::domain_error for x <= 0.
double log_gamma(double x);

// psi(x) = d/dx ln Gamma(x) for x > 0. Absolute error <= 1e-10 on [1e-4, 1e8].
double digamma(double x);

// ln B(a, b), a > 0, b > 0.
double log_beta(double a, double b);

// P(G <= x) for G ~ Gamma(shape, rate). Absolute error <= 1e-10.
// Series for scaled argument below shape+1, continued fraction above;
// throws SolverFailure if 500 terms do not converge (regimes with
// shape ~ 1e6 near the mean can exceed the cap, callers at that scale
// should use Monte Carlo quantiles instead).
double reg_gamma_cdf(double shape, double rate, double x);

}  // namespace mixrate
