#include "mixrate/models.hpp"

#include <cmath>
#include <stdexcept>

#include "mixrate/specfun.hpp"

namespace mixrate {

void validate(const FrequencyParams& fp) {
  // p = 0 and p = 1 pass as the degenerate single-component limits; the
  // fitters additionally require an interior p
  if (!(fp.p >= 0.0) || !(fp.p <= 1.0)) {
    throw std::domain_error("FrequencyParams: p must lie in [0,1]");
  }
  if (!(fp.alpha1 > 0.0) || !(fp.alpha2 > 0.0) || !(fp.beta > 0.0)) {
    throw std::domain_error("FrequencyParams: alpha1, alpha2, beta must be > 0");
  }
}

void validate(const SeverityParams& sp) {
  if (!(sp.nu > 0.0) || !(sp.nu <= 1.0)) {
    throw std::domain_error("SeverityParams: nu must lie in (0,1]");
  }
  if (!(sp.mu > 0.0) || !(sp.delta > 0.0) || !(sp.sigma > 0.0)) {
    throw std::domain_error("SeverityParams: mu, delta, sigma must be > 0");
  }
}

double nb_log_pmf(double shape, double beta, long long n) {
  if (n < 0) return -INFINITY;
  double dn = static_cast<double>(n);
  // log q = -log1p(1/beta) and log(1-q) = -log1p(beta) avoid cancellation
  // between log(beta) and log(beta + 1) when beta is large
  return log_gamma(dn + shape) - log_gamma(shape) - log_gamma(dn + 1.0) -
         shape * std::log1p(1.0 / beta) - dn * std::log1p(beta);
}

double frequency_pmf(const FrequencyParams& fp, long long n) {
  if (n < 0) return 0.0;
  double l1 = nb_log_pmf(fp.alpha1, fp.beta, n);
  double l2 = nb_log_pmf(fp.alpha1 + fp.alpha2, fp.beta, n);
  double t1 = fp.p > 0.0 ? fp.p * std::exp(l1) : 0.0;
  double t2 = fp.p < 1.0 ? (1.0 - fp.p) * std::exp(l2) : 0.0;
  return t1 + t2;
}

namespace {

double gamma_log_density(double shape, double rate, double x) {
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         log_gamma(shape);
}

}  // namespace

double prior_density(const FrequencyParams& fp, double lambda) {
  if (!(lambda > 0.0)) throw std::domain_error("prior_density: lambda must be > 0");
  double t1 = fp.p > 0.0
                  ? fp.p * std::exp(gamma_log_density(fp.alpha1, fp.beta, lambda))
                  : 0.0;
  double t2 = fp.p < 1.0
                  ? (1.0 - fp.p) *
                        std::exp(gamma_log_density(fp.alpha1 + fp.alpha2, fp.beta, lambda))
                  : 0.0;
  return t1 + t2;
}

double severity_density(const SeverityParams& sp, double y) {
  if (!(y > 0.0)) throw std::domain_error("severity_density: y must be > 0");
  double f = sp.mu * std::exp(-sp.mu * y);
  // log1p(y/sigma) keeps the Lomax log density exact even when delta and
  // sigma are huge and the component is indistinguishable from an exponential
  double g = std::exp(std::log(sp.delta) - std::log(sp.sigma) -
                      (sp.delta + 1.0) * std::log1p(y / sp.sigma));
  return sp.nu * f + (1.0 - sp.nu) * g;
}

double nu_from_frequency(const FrequencyParams& fp) {
  return fp.p + (1.0 - fp.p) * fp.alpha1 / (fp.alpha1 + fp.alpha2);
}

}  // namespace mixrate
