#pragma once

#include <functional>

#include "mixrate/models.hpp"

namespace mixrate {

struct ArrivalPair {
  double t = 0.0;  // inter-arrival time, period units
  double y = 0.0;  // claim size
};

// sum of count log-pmfs plus severity log-densities; the joint likelihood
// factorizes, so this equals the two marginal log-likelihoods added
double global_loglik(const FrequencyParams& fp, const SeverityParams& sp,
                     const ClaimHistory& history);

// mixture of two Lomax densities: Lomax(alpha1, beta) with weight p,
// Lomax(alpha1+alpha2, beta) otherwise
double interarrival_density(const FrequencyParams& fp, double t);

// f and g are the two severity component densities evaluated pointwise.
// The split-rate mixture is integrated numerically against
// Beta(alpha1, alpha2), keeping the xi = 1 atom analytic; this is
// evaluation only, the product over pairs and the integral do not
// interchange.
double joint_pair_density(const FrequencyParams& fp,
                          const std::function<double(double)>& f,
                          const std::function<double(double)>& g,
                          const ArrivalPair& pair);

}  // namespace mixrate
