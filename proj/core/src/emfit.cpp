#include "mixrate/emfit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "mixrate/errors.hpp"
#include "mixrate/specfun.hpp"

namespace mixrate {

namespace {

constexpr double kTauFloor = 1e-300;
constexpr double kTauCeil = 1.0 - 1e-16;

double clamp_tau(double t) { return std::min(std::max(t, kTauFloor), kTauCeil); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// residual tolerance for M-step systems grows with the weight mass so the
// stopping rule stays a fixed relative accuracy of the summed gradients
double scaled_residual_tol(const NewtonOptions& opts, double weight_mass) {
  return opts.residual_tolerance * std::max(1.0, weight_mass);
}

// counts compressed to unique values; exact for any tau because every sum
// in the E/M steps couples tau_i to n_i only through per-value aggregates
struct CountGroup {
  long long n;
  double mult;      // observations with this value
  double sum_tau;   // aggregated responsibilities (filled per use)
};

std::vector<CountGroup> group_counts(const std::vector<long long>& counts) {
  std::map<long long, double> mult;
  for (long long n : counts) {
    if (n < 0) throw std::domain_error("counts must be >= 0");
    mult[n] += 1.0;
  }
  std::vector<CountGroup> groups;
  groups.reserve(mult.size());
  for (auto& [n, m] : mult) groups.push_back({n, m, 0.0});
  return groups;
}

}  // namespace

// ---- frequency component ----

std::vector<double> freq_responsibilities(const FrequencyParams& fp,
                                          const std::vector<long long>& counts) {
  std::vector<double> tau(counts.size());
  if (fp.p >= 1.0) {
    std::fill(tau.begin(), tau.end(), kTauCeil);
    return tau;
  }
  if (fp.p <= 0.0) {
    std::fill(tau.begin(), tau.end(), kTauFloor);
    return tau;
  }
  double lp = std::log(fp.p);
  double lq = std::log1p(-fp.p);
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double l1 = lp + nb_log_pmf(fp.alpha1, fp.beta, counts[i]);
    double l2 = lq + nb_log_pmf(fp.alpha1 + fp.alpha2, fp.beta, counts[i]);
    tau[i] = clamp_tau(sigmoid(l1 - l2));
  }
  return tau;
}

double freq_q_function(const FrequencyParams& fp,
                       const std::vector<long long>& counts,
                       const std::vector<double>& tau) {
  if (counts.size() != tau.size()) {
    throw std::invalid_argument("freq_q_function: counts/tau size mismatch");
  }
  double lp = fp.p > 0.0 ? std::log(fp.p) : -INFINITY;
  double lq = fp.p < 1.0 ? std::log1p(-fp.p) : -INFINITY;
  double q = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    double t = tau[i];
    // zero-weight terms drop even when their log mass is -inf
    if (t > 0.0) q += t * (lp + nb_log_pmf(fp.alpha1, fp.beta, counts[i]));
    if (t < 1.0) {
      q += (1.0 - t) * (lq + nb_log_pmf(fp.alpha1 + fp.alpha2, fp.beta, counts[i]));
    }
  }
  return q;
}

namespace {

// M-step system for (log alpha1, log alpha2) after eliminating
// beta = (alpha1 m + alpha2 s0) / sum_n from its stationarity relation
struct FreqSystem {
  const std::vector<CountGroup>& groups;
  double m;       // group multiplicity total
  double s0;      // sum of (1 - tau)
  double sum_n;   // sum of counts

  void operator()(const std::array<double, 2>& x, std::array<double, 2>& f) const {
    double a1 = std::exp(std::min(x[0], 700.0));
    double a2 = std::exp(std::min(x[1], 700.0));
    double digamma_a1 = digamma(a1);
    double digamma_a12 = digamma(a1 + a2);
    double s_tau = 0.0;   // sum tau_i (psi(n_i+a1) - psi(a1))
    double s_comp = 0.0;  // sum (1-tau_i) (psi(n_i+a1+a2) - psi(a1+a2))
    for (const CountGroup& g : groups) {
      double dn = static_cast<double>(g.n);
      s_tau += g.sum_tau * (digamma(dn + a1) - digamma_a1);
      s_comp += (g.mult - g.sum_tau) * (digamma(dn + a1 + a2) - digamma_a12);
    }
    // log(beta/(beta+1)) with beta = (a1 m + a2 s0)/sum_n
    double log_q = -std::log1p(sum_n / (a1 * m + a2 * s0));
    f[0] = s_tau + s_comp + m * log_q;
    f[1] = s_comp + s0 * log_q;
  }
};

FrequencyParams freq_m_step_grouped(std::vector<CountGroup>& groups, double m,
                                    const FrequencyParams& warm,
                                    const EmConfig& cfg) {
  double sum_tau = 0.0;
  double sum_n = 0.0;
  for (const CountGroup& g : groups) {
    sum_tau += g.sum_tau;
    sum_n += g.mult * static_cast<double>(g.n);
  }
  if (sum_n <= 0.0) {
    throw DegenerateData("freq_m_step: all counts are zero, beta has no finite root");
  }
  double s0 = m - sum_tau;

  NewtonOptions solver = cfg.solver;
  solver.residual_tolerance = scaled_residual_tol(cfg.solver, m);
  FreqSystem system{groups, m, s0, sum_n};
  std::array<double, 2> x0 = {std::log(warm.alpha1), std::log(warm.alpha2)};
  std::array<double, 2> x = damped_newton<2>(system, x0, solver);

  FrequencyParams out;
  out.p = std::min(std::max(sum_tau / m, kTauFloor), kTauCeil);
  out.alpha1 = std::exp(x[0]);
  out.alpha2 = std::exp(x[1]);
  out.beta = (out.alpha1 * m + out.alpha2 * s0) / sum_n;
  return out;
}

double freq_loglik_grouped(const FrequencyParams& fp,
                           const std::vector<CountGroup>& groups) {
  double lp = fp.p > 0.0 ? std::log(fp.p) : -INFINITY;
  double lq = fp.p < 1.0 ? std::log1p(-fp.p) : -INFINITY;
  double ll = 0.0;
  for (const CountGroup& g : groups) {
    double l1 = lp + nb_log_pmf(fp.alpha1, fp.beta, g.n);
    double l2 = lq + nb_log_pmf(fp.alpha1 + fp.alpha2, fp.beta, g.n);
    double hi = std::max(l1, l2);
    double lo = std::min(l1, l2);
    double v = std::isinf(hi) && hi < 0.0 ? -INFINITY
                                          : hi + std::log1p(std::exp(lo - hi));
    ll += g.mult * v;
  }
  return ll;
}

}  // namespace

FrequencyParams freq_m_step(const std::vector<long long>& counts,
                            const std::vector<double>& tau,
                            const FrequencyParams& warm_start,
                            const EmConfig& cfg) {
  if (counts.size() != tau.size()) {
    throw std::invalid_argument("freq_m_step: counts/tau size mismatch");
  }
  if (counts.empty()) throw DegenerateData("freq_m_step: no observations");
  std::map<long long, std::pair<double, double>> agg;  // n -> (mult, sum_tau)
  for (std::size_t i = 0; i < counts.size(); ++i) {
    auto& slot = agg[counts[i]];
    slot.first += 1.0;
    slot.second += tau[i];
  }
  std::vector<CountGroup> groups;
  groups.reserve(agg.size());
  for (auto& [n, slot] : agg) groups.push_back({n, slot.first, slot.second});
  return freq_m_step_grouped(groups, static_cast<double>(counts.size()), warm_start, cfg);
}

std::pair<FrequencyParams, EmTrace> fit_frequency(
    const std::vector<long long>& counts, const FrequencyParams& init,
    const EmConfig& cfg) {
  if (counts.empty()) throw DegenerateData("fit_frequency: no observations");
  validate(init);
  if (!(init.p > 0.0) || !(init.p < 1.0)) {
    throw std::domain_error("fit_frequency: init p must lie strictly in (0,1)");
  }

  std::vector<CountGroup> groups = group_counts(counts);
  double m = static_cast<double>(counts.size());

  FrequencyParams cur = init;
  EmTrace trace;
  auto record = [&](const FrequencyParams& fp) {
    trace.params.push_back({fp.p, fp.alpha1, fp.alpha2, fp.beta});
    trace.loglik.push_back(freq_loglik_grouped(fp, groups));
  };
  record(cur);

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    // E-step on the grouped counts
    double lp = std::log(cur.p);
    double lq = std::log1p(-cur.p);
    for (CountGroup& g : groups) {
      double l1 = lp + nb_log_pmf(cur.alpha1, cur.beta, g.n);
      double l2 = lq + nb_log_pmf(cur.alpha1 + cur.alpha2, cur.beta, g.n);
      g.sum_tau = g.mult * clamp_tau(sigmoid(l1 - l2));
    }
    FrequencyParams next;
    try {
      next = freq_m_step_grouped(groups, m, cur, cfg);
    } catch (const SolverFailure& e) {
      throw SolverFailure(std::string("fit_frequency: M-step failed at iteration ") +
                              std::to_string(iter + 1) + ": " + e.what(),
                          e.residual());
    }
    trace.iterations = iter + 1;
    double change = std::max(std::max(std::fabs(next.p - cur.p),
                                      std::fabs(next.alpha1 - cur.alpha1)),
                             std::max(std::fabs(next.alpha2 - cur.alpha2),
                                      std::fabs(next.beta - cur.beta)));
    cur = next;
    record(cur);
    if (cfg.loglik_criterion) {
      std::size_t k = trace.loglik.size();
      change = std::fabs(trace.loglik[k - 1] - trace.loglik[k - 2]);
    }
    if (change < cfg.tolerance) {
      trace.converged = true;
      break;
    }
  }
  return {cur, trace};
}

FrequencyParams moment_init_frequency(const std::vector<long long>& counts) {
  if (counts.size() < 2) {
    throw DegenerateData("moment_init_frequency: need at least two observations");
  }
  double m = static_cast<double>(counts.size());
  double mean = 0.0;
  for (long long n : counts) mean += static_cast<double>(n);
  mean /= m;
  double var = 0.0, mu3 = 0.0, below = 0.0;
  for (long long n : counts) {
    double d = static_cast<double>(n) - mean;
    var += d * d;
    mu3 += d * d * d;
    if (static_cast<double>(n) < mean) below += 1.0;
  }
  var /= m;
  mu3 /= m;
  if (!(var > mean)) {
    throw DegenerateData("moment_init_frequency: variance <= mean, no overdispersion");
  }

  const double c_max = var / mean;
  // third central moment of the mixture in terms of c = (1+beta)/beta and
  // the mean gap t of the heavy component: NB component mu3 is a c(2c-1),
  // the gap terms collapse via p d1 = -(1-p) d2
  auto mismatch = [&](double p, double c) {
    double t2 = p * (var - c * mean) / (1.0 - p);
    double k3 = (1.0 - p) * (2.0 * p - 1.0) / (p * p);
    return c * (2.0 * c - 1.0) * mean + 3.0 * c * (var - c * mean) +
           k3 * std::sqrt(t2) * t2 - mu3;
  };
  auto params_from = [&](double p, double c) -> FrequencyParams {
    double t = std::sqrt(p * (var - c * mean) / (1.0 - p));
    double u = mean - (1.0 - p) * t / p;  // light-component mean, must be > 0
    double w = mean + t;
    double beta = 1.0 / (c - 1.0);
    return FrequencyParams{p, u * beta, (w - u) * beta, beta};
  };

  double p_seed = std::min(std::max(below / m, 0.02), 0.98);
  const int grid = 512;
  const double lo = 1.0 + 1e-9;
  const double hi = c_max * (1.0 - 1e-12);

  for (int k = 0; k <= 90; ++k) {
    for (int sign : {+1, -1}) {
      if (k == 0 && sign < 0) continue;
      double p = p_seed + sign * 0.01 * k;
      if (p < 0.02 || p > 0.98) continue;
      double prev_c = lo;
      double prev_g = mismatch(p, lo);
      double root = -1.0;
      for (int i = 1; i < grid; ++i) {
        double c = lo + (hi - lo) * i / (grid - 1);
        double g = mismatch(p, c);
        if (prev_g == 0.0) {
          root = prev_c;
          break;
        }
        if (prev_g * g < 0.0) {
          double a = prev_c, b = c;
          for (int it = 0; it < 200; ++it) {
            double mid = 0.5 * (a + b);
            if (mismatch(p, mid) * prev_g <= 0.0) {
              b = mid;
            } else {
              a = mid;
            }
            if (b - a < 1e-12 * b) break;
          }
          root = 0.5 * (a + b);
          break;
        }
        prev_c = c;
        prev_g = g;
      }
      if (root > 0.0) {
        FrequencyParams fp = params_from(p, root);
        if (fp.alpha1 > 0.0 && fp.alpha2 > 0.0) return fp;
      }
    }
  }
  // best effort: keep mean and variance matched, drop the third moment
  FrequencyParams fp = params_from(p_seed, 0.5 * (1.0 + c_max));
  if (!(fp.alpha1 > 0.0) || !(fp.alpha2 > 0.0)) {
    throw DegenerateData("moment_init_frequency: moment system infeasible");
  }
  return fp;
}

// ---- severity component ----

std::vector<double> sev_responsibilities(const SeverityParams& sp,
                                         const std::vector<double>& severities) {
  std::vector<double> tau(severities.size());
  if (sp.nu >= 1.0) {
    std::fill(tau.begin(), tau.end(), kTauCeil);
    return tau;
  }
  double c1 = std::log(sp.nu) + std::log(sp.mu);
  // log Lomax density as log d - log s - (d+1) log1p(y/s): the log1p form
  // stays exact when the component degenerates along delta, sigma -> inf
  double c2 = std::log1p(-sp.nu) + std::log(sp.delta) - std::log(sp.sigma);
  for (std::size_t i = 0; i < severities.size(); ++i) {
    double y = severities[i];
    if (!(y > 0.0)) throw std::domain_error("sev_responsibilities: severities must be > 0");
    double l1 = c1 - sp.mu * y;
    double l2 = c2 - (sp.delta + 1.0) * std::log1p(y / sp.sigma);
    tau[i] = clamp_tau(sigmoid(l1 - l2));
  }
  return tau;
}

double sev_q_function(const SeverityParams& sp,
                      const std::vector<double>& severities,
                      const std::vector<double>& tau) {
  if (severities.size() != tau.size()) {
    throw std::invalid_argument("sev_q_function: severities/tau size mismatch");
  }
  double lnu = sp.nu > 0.0 ? std::log(sp.nu) : -INFINITY;
  double lcomp = sp.nu < 1.0 ? std::log1p(-sp.nu) : -INFINITY;
  double c1 = std::log(sp.mu);
  double c2 = std::log(sp.delta) - std::log(sp.sigma);
  double q = 0.0;
  for (std::size_t i = 0; i < severities.size(); ++i) {
    double y = severities[i];
    double t = tau[i];
    if (t > 0.0) q += t * (lnu + c1 - sp.mu * y);
    if (t < 1.0) {
      q += (1.0 - t) * (lcomp + c2 - (sp.delta + 1.0) * std::log1p(y / sp.sigma));
    }
  }
  return q;
}

namespace {

// (log delta, log sigma) stationarity system for the Lomax component.
// Both residuals depend on sigma only through two weighted sums, which are
// cached: the delta direction of the finite-difference Jacobian then
// reuses them, and the fit loop primes the cache from its E-step pass.
struct ParetoSystem {
  const std::vector<double>& y;
  const std::vector<double>* tau;  // null means unit weights
  double s0;                       // total weight, sum (1 - tau)

  mutable double cached_sigma = std::numeric_limits<double>::quiet_NaN();
  mutable double s_lp = 0.0;   // sum w_i log1p(y_i / sigma)
  mutable double s_inv = 0.0;  // sum w_i / (sigma + y_i)

  void prime(double sigma, double lp_sum, double inv_sum) const {
    cached_sigma = sigma;
    s_lp = lp_sum;
    s_inv = inv_sum;
  }

  void refresh(double sigma) const {
    if (sigma == cached_sigma) return;
    double lp = 0.0, is = 0.0;
    if (tau) {
      for (std::size_t i = 0; i < y.size(); ++i) {
        double w = 1.0 - (*tau)[i];
        lp += w * std::log1p(y[i] / sigma);
        is += w / (sigma + y[i]);
      }
    } else {
      for (double yi : y) {
        lp += std::log1p(yi / sigma);
        is += 1.0 / (sigma + yi);
      }
    }
    cached_sigma = sigma;
    s_lp = lp;
    s_inv = is;
  }

  // the log1p forms keep both residuals exact on the ridge where the Lomax
  // tends to an exponential through delta, sigma -> inf at fixed delta/sigma
  void operator()(const std::array<double, 2>& x, std::array<double, 2>& f) const {
    double delta = std::exp(std::min(x[0], 700.0));
    double sigma = std::exp(std::min(x[1], 700.0));
    refresh(sigma);
    f[0] = s0 / delta - s_lp;
    f[1] = delta * s0 / sigma - (delta + 1.0) * s_inv;
  }
};

}  // namespace

SeverityParams sev_m_step(const std::vector<double>& severities,
                          const std::vector<double>& tau,
                          const SeverityParams& warm_start, const EmConfig& cfg) {
  if (severities.size() != tau.size()) {
    throw std::invalid_argument("sev_m_step: severities/tau size mismatch");
  }
  if (severities.empty()) throw DegenerateData("sev_m_step: no observations");
  double m_star = static_cast<double>(severities.size());
  double sum_tau = 0.0, sum_tau_y = 0.0;
  for (std::size_t i = 0; i < severities.size(); ++i) {
    if (!(severities[i] > 0.0)) {
      throw std::domain_error("sev_m_step: severities must be > 0");
    }
    sum_tau += tau[i];
    sum_tau_y += tau[i] * severities[i];
  }
  double s0 = m_star - sum_tau;

  SeverityParams out = warm_start;
  out.nu = sum_tau / m_star;
  if (sum_tau > 0.0) out.mu = sum_tau / sum_tau_y;

  if (s0 <= 0.0) return out;  // empty Lomax component: leave (delta, sigma) warm

  NewtonOptions solver = cfg.solver;
  solver.residual_tolerance = scaled_residual_tol(cfg.solver, s0);
  const std::vector<double>* weights = sum_tau > 0.0 ? &tau : nullptr;
  ParetoSystem system{severities, weights, s0};
  std::array<double, 2> x0 = {std::log(warm_start.delta), std::log(warm_start.sigma)};
  std::array<double, 2> x = damped_newton<2>(system, x0, solver);
  out.delta = std::exp(x[0]);
  out.sigma = std::exp(x[1]);
  return out;
}

std::pair<SeverityParams, EmTrace> fit_severity(
    const std::vector<double>& severities, const SeverityParams& init,
    const EmConfig& cfg, std::optional<double> fixed_nu) {
  if (severities.empty()) throw DegenerateData("fit_severity: no observations");
  SeverityParams cur = init;
  if (fixed_nu) cur.nu = *fixed_nu;
  validate(cur);
  for (double y : severities) {
    if (!(y > 0.0)) throw std::domain_error("fit_severity: severities must be > 0");
  }

  double m_star = static_cast<double>(severities.size());
  std::vector<double> tau(severities.size());
  EmTrace trace;

  // single pass shared by the E-step, the log-likelihood and the sums that
  // prime the M-step solver cache at the current sigma
  struct PassSums {
    double loglik, sum_tau, sum_tau_y, s_lp, s_inv;
  };
  auto pass = [&](const SeverityParams& sp, bool fill_tau) {
    PassSums s{0.0, 0.0, 0.0, 0.0, 0.0};
    double c1 = std::log(sp.nu) + std::log(sp.mu);
    double c2 = sp.nu < 1.0
                    ? std::log1p(-sp.nu) + std::log(sp.delta) - std::log(sp.sigma)
                    : -INFINITY;
    for (std::size_t i = 0; i < severities.size(); ++i) {
      double y = severities[i];
      double lp = std::log1p(y / sp.sigma);
      double l1 = c1 - sp.mu * y;
      double l2 = c2 - (sp.delta + 1.0) * lp;
      double d = l2 - l1;
      double t, lse;
      if (d >= 0.0) {
        double e = std::exp(-d);
        t = e / (1.0 + e);
        lse = l2 + std::log1p(e);
      } else {
        double e = std::exp(d);
        t = 1.0 / (1.0 + e);
        lse = l1 + std::log1p(e);
      }
      t = clamp_tau(t);
      if (fill_tau) tau[i] = t;
      double w = 1.0 - t;
      s.loglik += lse;
      s.sum_tau += t;
      s.sum_tau_y += t * y;
      s.s_lp += w * lp;
      s.s_inv += w / (sp.sigma + y);
    }
    return s;
  };

  auto record = [&](const SeverityParams& sp, double ll) {
    trace.params.push_back({sp.nu, sp.mu, sp.delta, sp.sigma});
    trace.loglik.push_back(ll);
  };

  for (int iter = 0; iter < cfg.max_iterations; ++iter) {
    PassSums s = pass(cur, true);
    record(cur, s.loglik);

    SeverityParams next = cur;
    next.nu = fixed_nu ? *fixed_nu
                       : std::min(std::max(s.sum_tau / m_star, kTauFloor), kTauCeil);
    if (s.sum_tau > 0.0) next.mu = s.sum_tau / s.sum_tau_y;
    double s0 = m_star - s.sum_tau;
    if (s0 > 0.0) {
      NewtonOptions solver = cfg.solver;
      solver.residual_tolerance = scaled_residual_tol(cfg.solver, s0);
      ParetoSystem system{severities, &tau, s0};
      system.prime(cur.sigma, s.s_lp, s.s_inv);
      std::array<double, 2> x0 = {std::log(cur.delta), std::log(cur.sigma)};
      std::array<double, 2> x;
      try {
        x = damped_newton<2>(system, x0, solver);
      } catch (const SolverFailure& e) {
        throw SolverFailure(std::string("fit_severity: M-step failed at iteration ") +
                                std::to_string(iter + 1) + ": " + e.what(),
                            e.residual());
      }
      next.delta = std::exp(x[0]);
      next.sigma = std::exp(x[1]);
    }

    trace.iterations = iter + 1;
    double change = std::max(std::max(std::fabs(next.mu - cur.mu),
                                      std::fabs(next.delta - cur.delta)),
                             std::max(std::fabs(next.sigma - cur.sigma),
                                      std::fabs(next.nu - cur.nu)));
    cur = next;
    if (cfg.loglik_criterion && trace.loglik.size() >= 2) {
      std::size_t k = trace.loglik.size();
      change = std::fabs(trace.loglik[k - 1] - trace.loglik[k - 2]);
    }
    if (change < cfg.tolerance) {
      trace.converged = true;
      break;
    }
  }
  record(cur, pass(cur, false).loglik);
  return {cur, trace};
}

}  // namespace mixrate
