#pragma once

#include <array>
#include <cmath>
#include <utility>

#include "mixrate/errors.hpp"

namespace mixrate {

struct NewtonOptions {
  int max_iterations = 100;
  double step_tolerance = 1e-10;     // max-norm on the damped step
  double residual_tolerance = 1e-10;  // max-norm; caller rescales for big sums
  double fd_step_rel = 1e-6;          // central-difference relative step
  int max_halvings = 30;
};

namespace detail {

template <int N>
bool solve_linear(std::array<std::array<double, N>, N> a, std::array<double, N>& b) {
  for (int col = 0; col < N; ++col) {
    int pivot = col;
    for (int r = col + 1; r < N; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    if (a[pivot][col] == 0.0 || !std::isfinite(a[pivot][col])) return false;
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < N; ++r) {
      double f = a[r][col] / a[col][col];
      for (int c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int col = N - 1; col >= 0; --col) {
    for (int c = col + 1; c < N; ++c) b[col] -= a[col][c] * b[c];
    b[col] /= a[col][col];
    if (!std::isfinite(b[col])) return false;
  }
  return true;
}

template <int N>
double max_norm(const std::array<double, N>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

template <int N>
double two_norm(const std::array<double, N>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace detail

// Damped Newton for small dense systems. The residual callback fills f at x;
// callers working with positive parameters pass log-parameters so positivity
// holds by construction. Jacobian by central differences.
template <int N, class Residual>
std::array<double, N> damped_newton(Residual&& residual, std::array<double, N> x,
                                    const NewtonOptions& opts = {}) {
  std::array<double, N> f{};
  residual(x, f);
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    double fnorm = detail::max_norm<N>(f);
    if (fnorm <= opts.residual_tolerance) return x;
    if (!std::isfinite(fnorm)) {
      throw SolverFailure("damped_newton: residual not finite at start point", fnorm);
    }

    std::array<std::array<double, N>, N> jac{};
    for (int j = 0; j < N; ++j) {
      double h = opts.fd_step_rel * std::max(std::fabs(x[j]), 1.0);
      std::array<double, N> xp = x, xm = x, fp{}, fm{};
      xp[j] += h;
      xm[j] -= h;
      residual(xp, fp);
      residual(xm, fm);
      for (int i = 0; i < N; ++i) jac[i][j] = (fp[i] - fm[i]) / (2.0 * h);
    }

    std::array<double, N> step = f;
    for (double& s : step) s = -s;
    if (!detail::solve_linear<N>(jac, step)) {
      throw SolverFailure("damped_newton: singular Jacobian", fnorm);
    }

    double base = detail::two_norm<N>(f);
    double lambda = 1.0;
    std::array<double, N> x_new{}, f_new{};
    bool improved = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      for (int i = 0; i < N; ++i) x_new[i] = x[i] + lambda * step[i];
      residual(x_new, f_new);
      double trial = detail::two_norm<N>(f_new);
      if (std::isfinite(trial) && trial < base) {
        improved = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!improved) {
      throw SolverFailure("damped_newton: no descent after 30 halvings", fnorm);
    }

    double step_size = lambda * detail::max_norm<N>(step);
    x = x_new;
    f = f_new;
    if (step_size < opts.step_tolerance) return x;
  }
  throw SolverFailure("damped_newton: iteration cap reached", detail::max_norm<N>(f));
}

}  // namespace mixrate
