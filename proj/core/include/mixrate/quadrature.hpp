#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <utility>

#include "mixrate/errors.hpp"
#include "mixrate/specfun.hpp"

namespace mixrate {

inline constexpr double kQuadAbsTol = 1e-9;

// Adaptive Gauss-Kronrod on [a, b]. Throws QuadratureError when the error
// estimate exceeds abs_tol.
template <class F>
double integrate_gk(F&& f, double a, double b, double abs_tol = kQuadAbsTol) {
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      std::forward<F>(f), a, b, 17, 1e-12, &err);
  if (!(err <= abs_tol) || !std::isfinite(v)) {
    throw QuadratureError("integrate_gk: tolerance not met", err);
  }
  return v;
}

// integral over (0,1) of f(xi) * Beta(xi; a1, a2).  Each half [0, 1/2] and
// [1/2, 1] is integrated in u = w^(1/c), where w is the distance to the
// half's endpoint and c = k / shape for an integer k >= max(shape, 4).  The
// change of variables turns the endpoint factor w^(shape - 1) dw into the
// monomial c u^(k-1) du, so the rule sees a smooth integrand for every
// shape; a fractional shape otherwise leaves a derivative singularity that
// stalls the Gauss-Kronrod error estimate without improving the value.
template <class F>
double integrate_against_beta(F&& f, double a1, double a2,
                              double abs_tol = kQuadAbsTol) {
  if (!(a1 > 0.0) || !(a2 > 0.0)) {
    throw std::domain_error("integrate_against_beta: shapes must be > 0");
  }
  const double lb = log_beta(a1, a2);
  const double half_tol = 0.5 * abs_tol;

  auto half = [&](double a_near, double a_far, bool lower) {
    const double k = std::max(4.0, std::ceil(a_near));
    const double c = k / a_near;
    const double upper = std::pow(0.5, 1.0 / c);
    return integrate_gk(
        [&, c, k](double u) {
          const double w = std::pow(u, c);
          const double xi = lower ? w : 1.0 - w;
          return f(xi) * c * std::pow(u, k - 1.0) *
                 std::exp((a_far - 1.0) * std::log1p(-w) - lb);
        },
        0.0, upper, half_tol);
  };
  return half(a1, a2, true) + half(a2, a1, false);
}

}  // namespace mixrate
