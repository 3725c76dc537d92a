#include "mixrate/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mixrate/errors.hpp"
#include "mixrate/rng.hpp"
#include "mixrate/specfun.hpp"

namespace mixrate {

namespace {

double sigmoid(double x) {
  // 1/(1+e^{-x}) without overflow on either tail
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

FrequencyPosterior frequency_posterior(const FrequencyParams& fp,
                                       const std::vector<long long>& counts) {
  double m = static_cast<double>(counts.size());
  double sum_n = 0.0;
  for (long long n : counts) {
    if (n < 0) throw std::domain_error("frequency_posterior: counts must be >= 0");
    sum_n += static_cast<double>(n);
  }
  FrequencyPosterior post;
  post.shape1 = sum_n + fp.alpha1;
  post.shape2 = sum_n + fp.alpha1 + fp.alpha2;
  post.rate = fp.beta + m;
  if (counts.empty()) {
    post.w = fp.p;  // posterior is the prior, exactly
    return post;
  }
  if (fp.p >= 1.0) {
    post.w = 1.0;
    return post;
  }
  if (fp.p <= 0.0) {
    post.w = 0.0;
    return post;
  }
  double log_g = std::log1p(-fp.p) - std::log(fp.p) + log_beta(fp.alpha1, fp.alpha2) -
                 log_beta(sum_n + fp.alpha1, fp.alpha2) +
                 fp.alpha2 * (std::log(fp.beta) - std::log(fp.beta + m));
  post.w = sigmoid(-log_g);
  return post;
}

double frequency_premium(const FrequencyPosterior& post) {
  return (post.w * post.shape1 + (1.0 - post.w) * post.shape2) / post.rate;
}

CredibilitySplit credibility_split(const FrequencyParams& fp,
                                   const std::vector<long long>& counts,
                                   int component) {
  if (component != 1 && component != 2) {
    throw std::domain_error("credibility_split: component must be 1 or 2");
  }
  double m = static_cast<double>(counts.size());
  double sum_n = std::accumulate(counts.begin(), counts.end(), 0.0);
  double alpha = component == 1 ? fp.alpha1 : fp.alpha1 + fp.alpha2;
  CredibilitySplit s;
  s.z = m / (fp.beta + m);
  s.sample_mean = m > 0.0 ? sum_n / m : 0.0;
  s.collective_mean = alpha / fp.beta;
  return s;
}

SeverityPosterior severity_posterior(const SeverityParams& sp,
                                     const std::vector<double>& severities) {
  double m_star = static_cast<double>(severities.size());
  double sum_y = 0.0;
  for (double y : severities) {
    if (!(y > 0.0)) throw std::domain_error("severity_posterior: severities must be > 0");
    sum_y += y;
  }
  SeverityPosterior post;
  post.mu = sp.mu;
  post.shape = m_star + sp.delta;
  post.rate = sp.sigma + sum_y;
  if (severities.empty()) {
    post.omega = sp.nu;  // the stated m* = 0 convention
    return post;
  }
  if (sp.nu >= 1.0) {
    post.omega = 1.0;
    return post;
  }
  double log_phi = std::log1p(-sp.nu) - std::log(sp.nu) + log_gamma(m_star + sp.delta) -
                   log_gamma(sp.delta) -
                   (m_star + sp.delta) * std::log1p(sum_y / sp.sigma) -
                   m_star * (std::log(sp.mu) + std::log(sp.sigma)) + sp.mu * sum_y;
  post.omega = sigmoid(-log_phi);
  return post;
}

double severity_premium(const SeverityPosterior& post) {
  if (post.omega >= 1.0) return 1.0 / post.mu;
  if (post.shape <= 1.0) {
    throw InfiniteMean("severity_premium: posterior shape <= 1, mean does not exist");
  }
  return post.omega / post.mu + (1.0 - post.omega) * post.rate / (post.shape - 1.0);
}

namespace {

// smallest x with cdf(x) >= q, by bracket growth plus bisection
template <class Cdf>
double generalized_inverse(Cdf&& cdf, double q, double scale_guess) {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::domain_error("posterior_quantile: q must lie in (0,1)");
  }
  double lo = 0.0;
  double hi = scale_guess > 0.0 ? scale_guess : 1.0;
  for (int i = 0; i < 200 && cdf(hi) < q; ++i) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    double c = cdf(mid);
    if (std::fabs(c - q) <= 1e-10) return mid;
    if (c >= q) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 1e-13 * std::max(1.0, hi)) break;  // atom: converge onto the jump
  }
  return hi;
}

}  // namespace

double posterior_quantile(const FrequencyPosterior& post, double q) {
  auto cdf = [&](double x) {
    double c1 = reg_gamma_cdf(post.shape1, post.rate, x);
    double c2 = post.w < 1.0 ? reg_gamma_cdf(post.shape2, post.rate, x) : 0.0;
    return post.w * c1 + (1.0 - post.w) * c2;
  };
  return generalized_inverse(cdf, q, 2.0 * post.shape2 / post.rate);
}

double posterior_quantile(const SeverityPosterior& post, double q) {
  if (post.omega >= 1.0) return post.mu;
  auto cdf = [&](double x) {
    double atom = x >= post.mu ? post.omega : 0.0;
    return atom + (1.0 - post.omega) * reg_gamma_cdf(post.shape, post.rate, x);
  };
  double guess = std::max(post.mu, 2.0 * post.shape / post.rate);
  return generalized_inverse(cdf, q, guess);
}

namespace {

double draw_lambda(const FrequencyPosterior& post, SplitRng& rng) {
  bool first = rng.uniform() < post.w;
  return rng.gamma(first ? post.shape1 : post.shape2, post.rate);
}

double draw_inverse_theta(const SeverityPosterior& post, SplitRng& rng) {
  if (rng.uniform() < post.omega) return 1.0 / post.mu;
  return 1.0 / rng.gamma(post.shape, post.rate);
}

double order_stat(std::vector<double>& v, double q) {
  auto idx = static_cast<std::size_t>(
      std::llround(q * static_cast<double>(v.size() - 1)));
  std::nth_element(v.begin(), v.begin() + idx, v.end());
  return v[idx];
}

}  // namespace

std::vector<PremiumQuote> premium_schedule(const FrequencyParams& fp,
                                           const SeverityParams& sp,
                                           const ClaimHistory& history,
                                           const ScheduleOptions& opts) {
  if (!(opts.ipr_level > 0.0) || !(opts.ipr_level < 1.0)) {
    throw std::domain_error("premium_schedule: ipr_level must lie in (0,1)");
  }
  if (opts.mc_draws < 2) {
    throw std::domain_error("premium_schedule: mc_draws must be >= 2");
  }
  std::size_t m = history.counts.size();
  double covered = 0.0;
  for (long long n : history.counts) covered += static_cast<double>(n);
  if (!history.severities.empty() &&
      history.severities.size() != static_cast<std::size_t>(covered)) {
    throw std::invalid_argument(
        "premium_schedule: severity list does not group by the counts");
  }

  SeverityParams sp_used = sp;
  if (opts.nu_source == ScheduleOptions::NuSource::frequency) {
    sp_used.nu = nu_from_frequency(fp);
  }

  // prefix offsets of each period's severity group
  std::vector<std::size_t> offset(m + 1, 0);
  for (std::size_t t = 0; t < m; ++t) {
    offset[t + 1] = offset[t] + static_cast<std::size_t>(history.counts[t]);
  }
  bool have_sev = !history.severities.empty();

  std::vector<PremiumQuote> schedule;
  schedule.reserve(m + 1);
  const double q_lo = 0.5 * (1.0 - opts.ipr_level);
  const double q_hi = 0.5 * (1.0 + opts.ipr_level);

  for (std::size_t t = 0; t <= m; ++t) {
    std::size_t begin = 0;
    if (opts.rolling_window > 0 && t > static_cast<std::size_t>(opts.rolling_window)) {
      begin = t - static_cast<std::size_t>(opts.rolling_window);
    }
    std::vector<long long> window_counts(history.counts.begin() + begin,
                                         history.counts.begin() + t);
    std::vector<double> window_sev;
    if (have_sev) {
      window_sev.assign(history.severities.begin() + offset[begin],
                        history.severities.begin() + offset[t]);
    }

    FrequencyPosterior fpost = frequency_posterior(fp, window_counts);
    SeverityPosterior spost = severity_posterior(sp_used, window_sev);

    PremiumQuote quote{};
    quote.frequency_mean = frequency_premium(fpost);
    quote.infinite_mean = spost.shape <= 1.0 && spost.omega < 1.0;
    if (quote.infinite_mean) {
      quote.severity_mean = INFINITY;
      quote.premium = INFINITY;
    } else {
      quote.severity_mean = severity_premium(spost);
      quote.premium = quote.frequency_mean * quote.severity_mean;
    }

    // product-posterior interval has no closed form; seeded Monte Carlo
    SplitRng rng = SplitRng::substream(opts.seed, 3, t);
    std::vector<double> draws(static_cast<std::size_t>(opts.mc_draws));
    for (double& d : draws) {
      double inv_theta = draw_inverse_theta(spost, rng);
      if (opts.ipr_target == ScheduleOptions::IprTarget::product) {
        d = draw_lambda(fpost, rng) * inv_theta;
      } else {
        d = inv_theta;
      }
    }
    quote.ipr_low = order_stat(draws, q_lo);
    quote.ipr_high = order_stat(draws, q_hi);
    schedule.push_back(quote);
  }
  return schedule;
}

}  // namespace mixrate
