#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "mixrate/models.hpp"
#include "mixrate/newton.hpp"

namespace mixrate {

struct EmConfig {
  double tolerance = 1e-3;  // max-abs change over raw parameters
  int max_iterations = 10000;
  NewtonOptions solver{};
  // when set, convergence is judged on the log-likelihood change instead
  bool loglik_criterion = false;
};

struct EmTrace {
  std::vector<std::vector<double>> params;  // iterates, including the final one
  std::vector<double> loglik;               // observed-data log-likelihood per iterate
  int iterations = 0;
  bool converged = false;
};

// ---- frequency component ----

// tau_i = P(first component | n_i); clamped to [1e-300, 1-1e-16]
std::vector<double> freq_responsibilities(const FrequencyParams& fp,
                                          const std::vector<long long>& counts);

// expected complete-data log-likelihood at fp given responsibilities
double freq_q_function(const FrequencyParams& fp,
                       const std::vector<long long>& counts,
                       const std::vector<double>& tau);

// p closed form; beta eliminated by its linear stationarity relation
// beta = (alpha1 m + alpha2 sum(1-tau)) / sum(n); (alpha1, alpha2) by
// damped Newton in log space.
FrequencyParams freq_m_step(const std::vector<long long>& counts,
                            const std::vector<double>& tau,
                            const FrequencyParams& warm_start,
                            const EmConfig& cfg);

std::pair<FrequencyParams, EmTrace> fit_frequency(
    const std::vector<long long>& counts, const FrequencyParams& init,
    const EmConfig& cfg = {});

// Deterministic start: p seeded from the fraction of counts below the mean,
// then mean/variance/third-central-moment matched; the match reduces to a
// one-dimensional root in c = (1+beta)/beta. When the seeded p admits no
// root, p is scanned outward in 0.01 steps; if the whole range fails, a
// variance-only midpoint start is returned (third moment unmatched).
// Throws DegenerateData when variance <= mean.
FrequencyParams moment_init_frequency(const std::vector<long long>& counts);

// ---- severity component ----

std::vector<double> sev_responsibilities(const SeverityParams& sp,
                                         const std::vector<double>& severities);

double sev_q_function(const SeverityParams& sp,
                      const std::vector<double>& severities,
                      const std::vector<double>& tau);

// nu and mu closed form; (delta, sigma) by damped Newton in log space.
// All-tau-one leaves (delta, sigma) at the warm start; all-tau-zero leaves
// mu untouched and solves the pure-Pareto system.
SeverityParams sev_m_step(const std::vector<double>& severities,
                          const std::vector<double>& tau,
                          const SeverityParams& warm_start, const EmConfig& cfg);

// fixed_nu pins nu for the whole fit (it then never enters the update)
std::pair<SeverityParams, EmTrace> fit_severity(
    const std::vector<double>& severities, const SeverityParams& init,
    const EmConfig& cfg = {}, std::optional<double> fixed_nu = std::nullopt);

}  // namespace mixrate
