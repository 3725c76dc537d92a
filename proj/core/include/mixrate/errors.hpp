#pragma once

#include <stdexcept>
#include <string>

namespace mixrate {

// Nonlinear solver or series evaluation did not reach its tolerance.
class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

// Input data cannot support the requested estimate (e.g. variance <= mean
// where overdispersion is required, or an empty sample).
class DegenerateData : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A requested posterior mean does not exist (Pareto-component shape <= 1).
class InfiniteMean : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Adaptive quadrature could not meet the requested tolerance.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved_tolerance() const { return achieved_; }

 private:
  double achieved_;
};

}  // namespace mixrate
