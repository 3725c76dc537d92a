#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixrate/models.hpp"

namespace mixrate {

struct GofStatistics {
  double ks = 0.0;
  double cvm = 0.0;
  double ad = 0.0;
};

// discrete statistics on a common support grid j = 0..K: KS is the sup of
// |F_emp - F_model|, CvM and AD are the Choulakian probability-weighted
// quadratic sums (AD cells with H(1-H) = 0 contribute nothing). All three
// vanish when the empirical CDF is tested against itself.
GofStatistics gof_statistics(const std::vector<double>& emp_cdf,
                             const std::vector<double>& model_pmf,
                             const std::vector<double>& model_cdf,
                             double sample_size);

struct GofReport {
  double ks = 0.0;
  double cvm = 0.0;
  double ad = 0.0;
  double p_ks = 0.0;
  double p_cvm = 0.0;
  double p_ad = 0.0;
  int bootstrap_replicates = 0;
  std::string variant;
};

// fixed-parameter parametric bootstrap: replicate datasets are simulated
// from params (no refit) on addressable substreams of seed, and
// p = (1 + #{stat* >= stat}) / (replicates + 1)
GofReport gof_counts(const std::vector<long long>& counts,
                     const FrequencyParams& params, int replicates,
                     std::uint64_t seed);

}  // namespace mixrate
