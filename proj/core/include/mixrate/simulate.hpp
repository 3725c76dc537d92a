#pragma once

#include <cstdint>
#include <vector>

#include "mixrate/models.hpp"

namespace mixrate {

enum class Scenario { finite_mean, infinite_mean };

struct SimConfig {
  std::uint64_t seed = 0;
  long long periods = 0;
  FrequencyParams frequency{};
  SeverityParams severity{};
  Scenario scenario = Scenario::finite_mean;
};

// scenario must agree with severity.delta: finite_mean needs delta > 1
void validate(const SimConfig& cfg);

// one substream per period: component indicator, then the matching Gamma
// intensity, then a Poisson count. Adding severity draws never perturbs
// counts because the two use disjoint stream tags.
std::vector<long long> simulate_counts(const SimConfig& cfg);

// i.i.d. mixture draws, one substream per claim: Exp(mu) with probability
// nu, otherwise Lomax via sigma (U^(-1/delta) - 1)
std::vector<double> simulate_severities(const SimConfig& cfg, std::size_t total);

// counts plus one severity per simulated claim, grouped by period
ClaimHistory simulate_history(const SimConfig& cfg);

}  // namespace mixrate
