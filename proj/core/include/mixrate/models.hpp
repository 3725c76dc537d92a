#pragma once

#include <cstdint>
#include <vector>

namespace mixrate {

// Frequency model: counts are Poisson with random intensity
// Lambda ~ p Gamma(alpha1, beta) + (1-p) Gamma(alpha1+alpha2, beta)
// (shape-rate), which makes the count a two-component NB mixture.
struct FrequencyParams {
  double p;       // mass of the foreseeable-only regime
  double alpha1;  // shape of the historical-stream intensity
  double alpha2;  // extra shape carried by the unforeseeable stream
  double beta;    // common rate
};

// Severity model: h(y) = nu mu e^{-mu y} + (1-nu) delta sigma^delta/(sigma+y)^{delta+1}
struct SeverityParams {
  double nu;     // weight of the exponential (historical) component
  double mu;     // exponential rate
  double delta;  // Lomax shape
  double sigma;  // Lomax scale
};

// Ordered per-period counts plus the pooled severities. When both parts are
// present the severities are grouped by period in order: the first counts[0]
// entries belong to period 1, the next counts[1] to period 2, and so on.
struct ClaimHistory {
  std::vector<long long> counts;
  std::vector<double> severities;
};

// Throw std::domain_error when a field is outside its domain. The mixing
// weight p admits both closed endpoints and nu admits 1 as single-component
// limits; the fitters demand interior starting weights on top of this.
void validate(const FrequencyParams& fp);
void validate(const SeverityParams& sp);

// log NB(n; shape, q) with q = beta/(beta+1), the count pmf of a
// Poisson-Gamma(shape, beta) mixture. Shared by the pmf, EM and GoF paths.
double nb_log_pmf(double shape, double beta, long long n);

// P(N = n) for the two-component NB mixture.
double frequency_pmf(const FrequencyParams& fp, long long n);

// density of the mixing intensity Lambda at lambda > 0
double prior_density(const FrequencyParams& fp, double lambda);

// h(y) for y > 0
double severity_density(const SeverityParams& sp, double y);

// nu = p + (1-p) alpha1/(alpha1+alpha2); the B(alpha1+1,alpha2)/B(alpha1,alpha2)
// recurrence collapses to the shape ratio.
double nu_from_frequency(const FrequencyParams& fp);

}  // namespace mixrate
