#include "mixrate/simulate.hpp"

#include <stdexcept>

#include "mixrate/rng.hpp"

namespace mixrate {

namespace {
constexpr std::uint64_t kCountTag = 1;
constexpr std::uint64_t kSeverityTag = 2;
}  // namespace

void validate(const SimConfig& cfg) {
  if (cfg.periods <= 0) throw std::domain_error("SimConfig: periods must be > 0");
  validate(cfg.frequency);
  validate(cfg.severity);
  bool finite = cfg.severity.delta > 1.0;
  if (finite != (cfg.scenario == Scenario::finite_mean)) {
    throw std::domain_error("SimConfig: scenario inconsistent with severity.delta");
  }
}

std::vector<long long> simulate_counts(const SimConfig& cfg) {
  validate(cfg);
  const FrequencyParams& fp = cfg.frequency;
  std::vector<long long> counts(static_cast<std::size_t>(cfg.periods));
  for (long long i = 0; i < cfg.periods; ++i) {
    SplitRng rng = SplitRng::substream(cfg.seed, kCountTag, static_cast<std::uint64_t>(i));
    double shape = rng.uniform() < fp.p ? fp.alpha1 : fp.alpha1 + fp.alpha2;
    double lambda = rng.gamma(shape, fp.beta);
    counts[static_cast<std::size_t>(i)] = rng.poisson(lambda);
  }
  return counts;
}

std::vector<double> simulate_severities(const SimConfig& cfg, std::size_t total) {
  validate(cfg);
  const SeverityParams& sp = cfg.severity;
  std::vector<double> out(total);
  for (std::size_t j = 0; j < total; ++j) {
    SplitRng rng = SplitRng::substream(cfg.seed, kSeverityTag, j);
    if (rng.uniform() < sp.nu) {
      out[j] = rng.exponential(sp.mu);
    } else {
      out[j] = rng.pareto(sp.delta, sp.sigma);
    }
  }
  return out;
}

ClaimHistory simulate_history(const SimConfig& cfg) {
  ClaimHistory history;
  history.counts = simulate_counts(cfg);
  std::size_t total = 0;
  for (long long n : history.counts) total += static_cast<std::size_t>(n);
  history.severities = simulate_severities(cfg, total);
  return history;
}

}  // namespace mixrate
