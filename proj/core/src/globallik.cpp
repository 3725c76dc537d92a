#include "mixrate/globallik.hpp"

#include <cmath>
#include <stdexcept>

#include "mixrate/quadrature.hpp"

namespace mixrate {

namespace {

// log1p(t/scale) keeps the log density exact for shapes far above the
// magnitude where log(scale) - log(scale + t) cancels
double lomax_density(double shape, double scale, double t) {
  return std::exp(std::log(shape) - std::log(scale) -
                  (shape + 1.0) * std::log1p(t / scale));
}

}  // namespace

double global_loglik(const FrequencyParams& fp, const SeverityParams& sp,
                     const ClaimHistory& history) {
  validate(fp);
  validate(sp);
  long long total = 0;
  for (long long n : history.counts) {
    if (n < 0) throw std::invalid_argument("global_loglik: negative count");
    total += n;
  }
  if (static_cast<std::size_t>(total) != history.severities.size()) {
    throw std::invalid_argument(
        "global_loglik: severity count does not match the count totals");
  }
  double ll = 0.0;
  for (long long n : history.counts) ll += std::log(frequency_pmf(fp, n));
  for (double y : history.severities) ll += std::log(severity_density(sp, y));
  return ll;
}

double interarrival_density(const FrequencyParams& fp, double t) {
  validate(fp);
  if (!(t >= 0.0)) throw std::domain_error("interarrival_density: t must be > 0");
  return fp.p * lomax_density(fp.alpha1, fp.beta, t) +
         (1.0 - fp.p) * lomax_density(fp.alpha1 + fp.alpha2, fp.beta, t);
}

double joint_pair_density(const FrequencyParams& fp,
                          const std::function<double(double)>& f,
                          const std::function<double(double)>& g,
                          const ArrivalPair& pair) {
  validate(fp);
  if (!(pair.t > 0.0) || !(pair.y > 0.0)) {
    throw std::domain_error("joint_pair_density: pair must be positive");
  }
  double fy = f(pair.y);
  double gy = g(pair.y);
  double atom = fp.p * fy * lomax_density(fp.alpha1, fp.beta, pair.t);
  // conditional on the split rate being interior, the intensity is
  // Gamma(alpha1+alpha2, beta) independent of xi, so the time factor sits
  // outside while the size mixture is integrated against the Beta law
  double mix = integrate_against_beta(
      [fy, gy](double xi) { return xi * fy + (1.0 - xi) * gy; }, fp.alpha1,
      fp.alpha2);
  return atom + (1.0 - fp.p) * mix *
                    lomax_density(fp.alpha1 + fp.alpha2, fp.beta, pair.t);
}

}  // namespace mixrate
