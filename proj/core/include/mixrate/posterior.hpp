#pragma once

#include <cstdint>
#include <vector>

#include "mixrate/models.hpp"

namespace mixrate {

// posterior of Lambda given counts: w Gamma(shape1, rate) + (1-w) Gamma(shape2, rate)
struct FrequencyPosterior {
  double w;
  double shape1;  // sum(n) + alpha1
  double shape2;  // sum(n) + alpha1 + alpha2
  double rate;    // beta + m
};

// posterior of Theta given severities: omega Dirac({mu}) + (1-omega) Gamma(shape, rate)
struct SeverityPosterior {
  double omega;
  double mu;
  double shape;  // m* + delta
  double rate;   // sigma + sum(y)
};

struct PremiumQuote {
  double frequency_mean;
  double severity_mean;  // +inf when infinite_mean is set
  double premium;
  double ipr_low;
  double ipr_high;
  bool infinite_mean;  // prior-stage delta <= 1 with no observed claims yet
};

FrequencyPosterior frequency_posterior(const FrequencyParams& fp,
                                       const std::vector<long long>& counts);

// posterior mean count, w shape1/rate + (1-w) shape2/rate
double frequency_premium(const FrequencyPosterior& post);

// Each Gamma-component posterior mean is a credibility-weighted average:
// (sum n + alpha)/(beta+m) = z nbar + (1-z) alpha/beta with z = m/(beta+m).
struct CredibilitySplit {
  double z;
  double sample_mean;
  double collective_mean;
};
CredibilitySplit credibility_split(const FrequencyParams& fp,
                                   const std::vector<long long>& counts,
                                   int component);  // 1 or 2

SeverityPosterior severity_posterior(const SeverityParams& sp,
                                     const std::vector<double>& severities);

// posterior mean claim size, omega/mu + (1-omega) rate/(shape-1).
// Throws InfiniteMean when shape <= 1 unless omega == 1 (the Gamma
// component then carries no weight and the mean is just 1/mu).
double severity_premium(const SeverityPosterior& post);

// generalized-inverse CDF; bisection to 1e-10 in probability, cap 200 steps
double posterior_quantile(const FrequencyPosterior& post, double q);
double posterior_quantile(const SeverityPosterior& post, double q);

struct ScheduleOptions {
  double ipr_level = 0.90;
  int mc_draws = 100000;
  std::uint64_t seed = 0;
  enum class IprTarget { product, severity };
  IprTarget ipr_target = IprTarget::product;
  int rolling_window = 0;  // 0 means expanding window
  enum class NuSource { frequency, severity };
  NuSource nu_source = NuSource::frequency;
};

// One quote per period t = 0..m; row t conditions on periods 1..t
// (expanding window) or the last rolling_window of them. Row 0 is the
// prior-only quote. Severities must group by counts when present
// (sum of counts covered by the severity list); counts-only histories
// price the severity side from the prior alone.
std::vector<PremiumQuote> premium_schedule(const FrequencyParams& fp,
                                           const SeverityParams& sp,
                                           const ClaimHistory& history,
                                           const ScheduleOptions& opts = {});

}  // namespace mixrate
