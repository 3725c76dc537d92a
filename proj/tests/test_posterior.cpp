#include <boost/math/distributions/gamma.hpp>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "helpers/oracles.hpp"
#include "mixrate/errors.hpp"
#include "mixrate/posterior.hpp"
#include "mixrate/rng.hpp"
#include "mixrate/simulate.hpp"
#include "mixrate/specfun.hpp"

using namespace mixrate;

namespace {

const FrequencyParams kFitted{0.5929959, 97.55820446, 30.14706672, 0.01978072};

double log_gamma_density(double shape, double rate, double x) {
  return shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x -
         log_gamma(shape);
}

// posterior mean of Lambda by quadrature of the un-normalized posterior,
// independent of the closed-form weight; the window spans +-12 posterior
// standard deviations of the wider component
double freq_mean_by_quadrature(const FrequencyParams& fp,
                               const std::vector<long long>& counts) {
  double m = static_cast<double>(counts.size());
  double sum_n = 0.0;
  for (long long n : counts) sum_n += static_cast<double>(n);
  double shape_hi = sum_n + fp.alpha1 + fp.alpha2;
  double rate = fp.beta + m;
  double center = shape_hi / rate;
  double spread = 12.0 * std::sqrt(shape_hi) / rate + (fp.alpha2 + 1.0) / rate;
  double lo = std::max(1e-9, center - spread - fp.alpha2 / rate);
  double hi = center + spread;
  auto log_post = [&](double lam) {
    double l1 = std::log(fp.p) + log_gamma_density(fp.alpha1, fp.beta, lam);
    double l2 = std::log1p(-fp.p) +
                log_gamma_density(fp.alpha1 + fp.alpha2, fp.beta, lam);
    double prior = l1 > l2 ? l1 + std::log1p(std::exp(l2 - l1))
                           : l2 + std::log1p(std::exp(l1 - l2));
    return prior + sum_n * std::log(lam) - m * lam;
  };
  auto numer = oracle::integrate_log_weighted(
      log_post, [](double lam) { return lam; }, lo, hi);
  auto denom = oracle::integrate_log_weighted(
      log_post, [](double) { return 1.0; }, lo, hi);
  return numer.value / denom.value * std::exp(numer.shift - denom.shift);
}

// posterior mean of 1/Theta by quadrature; the Dirac atom enters analytically
double sev_mean_by_quadrature(const SeverityParams& sp,
                              const std::vector<double>& severities,
                              double hi) {
  double m_star = static_cast<double>(severities.size());
  double sum_y = 0.0;
  for (double y : severities) sum_y += y;
  double atom_mass = sp.nu * std::exp(m_star * std::log(sp.mu) - sp.mu * sum_y);
  auto unnorm = [&](double th) {
    return std::exp(std::log1p(-sp.nu) + m_star * std::log(th) - th * sum_y +
                    log_gamma_density(sp.delta, sp.sigma, th));
  };
  double cont_mass = oracle::integrate_gridded(unnorm, 1e-13, hi, 1e-14);
  double cont_inv = oracle::integrate_gridded(
      [&](double th) { return unnorm(th) / th; }, 1e-13, hi, 1e-14);
  return (atom_mass / sp.mu + cont_inv) / (atom_mass + cont_mass);
}

}  // namespace

TEST_SUITE("posterior") {

TEST_CASE("frequency_posterior with no data returns the prior") {
  FrequencyParams fp{0.3, 2.0, 5.0, 1.5};
  FrequencyPosterior post = frequency_posterior(fp, {});
  CHECK(post.w == fp.p);
  CHECK(post.shape1 == fp.alpha1);
  CHECK(post.shape2 == fp.alpha1 + fp.alpha2);
  CHECK(post.rate == fp.beta);
}

TEST_CASE("frequency posterior weight tends to one as p does") {
  std::vector<long long> counts{3, 7, 4};
  CHECK(frequency_posterior(FrequencyParams{1.0, 2.0, 5.0, 1.5}, counts).w == 1.0);
  CHECK(frequency_posterior(FrequencyParams{1.0 - 1e-9, 2.0, 5.0, 1.5}, counts).w >
        0.999);
}

TEST_CASE("frequency posterior weight falls as total counts grow") {
  FrequencyParams fp{0.5, 4.0, 6.0, 1.0};
  double prev = 1.0;
  for (long long total : {0LL, 4LL, 12LL, 30LL, 80LL}) {
    std::vector<long long> counts{total, 0, 0};
    double w = frequency_posterior(fp, counts).w;
    CHECK(w < prev);
    prev = w;
  }
}

TEST_CASE("frequency posterior mean matches quadrature on portfolio-scale counts") {
  std::vector<long long> counts{4964, 4400, 4527};
  double mean = frequency_premium(frequency_posterior(kFitted, counts));
  double by_quad = freq_mean_by_quadrature(kFitted, counts);
  CHECK(mean == doctest::Approx(by_quad).epsilon(1e-6));
}

TEST_CASE("frequency premium without data is the prior mean") {
  double premium = frequency_premium(frequency_posterior(kFitted, {}));
  CHECK(std::fabs(premium - 5552.0) <= 1.0);
  FrequencyPosterior pure{1.0, 10.0, 20.0, 2.0};
  CHECK(frequency_premium(pure) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("each posterior component mean is the credibility-weighted average") {
  SplitRng rng(7, 0);
  for (int rep = 0; rep < 25; ++rep) {
    FrequencyParams fp{0.1 + 0.8 * rng.uniform(), 0.5 + 5.0 * rng.uniform(),
                       0.5 + 5.0 * rng.uniform(), 0.2 + 3.0 * rng.uniform()};
    std::vector<long long> counts;
    for (int i = 0; i < 4; ++i) counts.push_back(rng.poisson(6.0));
    FrequencyPosterior post = frequency_posterior(fp, counts);
    for (int component : {1, 2}) {
      CredibilitySplit split = credibility_split(fp, counts, component);
      double blended =
          split.z * split.sample_mean + (1.0 - split.z) * split.collective_mean;
      double direct = (component == 1 ? post.shape1 : post.shape2) / post.rate;
      CHECK(blended == doctest::Approx(direct).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(credibility_split(kFitted, {1, 2}, 3), std::domain_error);
}

TEST_CASE("degenerate p reduces to the single-component exact-credibility update") {
  std::vector<long long> counts{5, 9, 2, 7};
  FrequencyParams fp{1.0, 3.0, 8.0, 2.0};
  double premium = frequency_premium(frequency_posterior(fp, counts));
  CredibilitySplit split = credibility_split(fp, counts, 1);
  double credibility =
      split.z * split.sample_mean + (1.0 - split.z) * split.collective_mean;
  CHECK(premium == doctest::Approx(credibility).epsilon(1e-12));

  fp.p = 0.0;
  premium = frequency_premium(frequency_posterior(fp, counts));
  split = credibility_split(fp, counts, 2);
  credibility =
      split.z * split.sample_mean + (1.0 - split.z) * split.collective_mean;
  CHECK(premium == doctest::Approx(credibility).epsilon(1e-12));
}

TEST_CASE("severity posterior conventions at the boundaries") {
  SeverityParams sp{0.8374, 1.3, 2.0, 1.0};
  SeverityPosterior empty = severity_posterior(sp, {});
  CHECK(empty.omega == sp.nu);  // exact, not approximate
  CHECK(empty.shape == sp.delta);
  CHECK(empty.rate == sp.sigma);
  sp.nu = 1.0;
  CHECK(severity_posterior(sp, {0.4, 2.2}).omega == 1.0);
  CHECK_THROWS_AS(severity_posterior(sp, {0.4, -1.0}), std::domain_error);
}

TEST_CASE("severity posterior mean matches quadrature") {
  SeverityParams sp{0.9, 1.0, 2.0, 1.0};
  std::vector<double> ys{0.5, 1.2};
  double mean = severity_premium(severity_posterior(sp, ys));
  CHECK(mean == doctest::Approx(sev_mean_by_quadrature(sp, ys, 80.0)).epsilon(1e-6));

  // mu and sigma both away from 1, where the posterior weight is most
  // sensitive to the scale terms of the marginal likelihood ratio
  SeverityParams scaled{0.684, 1.287, 2.322, 1.803};
  std::vector<double> ys2{0.9, 2.4, 2.507};
  double mean2 = severity_premium(severity_posterior(scaled, ys2));
  CHECK(mean2 ==
        doctest::Approx(sev_mean_by_quadrature(scaled, ys2, 40.0)).epsilon(1e-6));
}

TEST_CASE("severity premium closed forms and the infinite-mean guard") {
  SeverityPosterior prior_like{0.9039196, 1.0, 2.0, 1.0};
  CHECK(severity_premium(prior_like) == doctest::Approx(1.0).epsilon(1e-12));
  SeverityPosterior atom_only{1.0, 0.25, 2.0, 1.0};
  CHECK(severity_premium(atom_only) == doctest::Approx(4.0).epsilon(1e-15));
  SeverityPosterior heavy{0.9039196, 1.0, 0.3, 0.5};
  CHECK_THROWS_AS(severity_premium(heavy), InfiniteMean);
}

TEST_CASE("frequency quantile inverts the mixture CDF") {
  FrequencyPosterior post = frequency_posterior(kFitted, {4964, 4400, 4527});
  for (double q : {0.05, 0.25, 0.5, 0.75, 0.95}) {
    double x = posterior_quantile(post, q);
    double cdf = post.w * reg_gamma_cdf(post.shape1, post.rate, x) +
                 (1.0 - post.w) * reg_gamma_cdf(post.shape2, post.rate, x);
    CHECK(std::fabs(cdf - q) <= 1e-8);
  }
  CHECK_THROWS_AS(posterior_quantile(post, 0.0), std::domain_error);
  CHECK_THROWS_AS(posterior_quantile(post, 1.0), std::domain_error);
}

TEST_CASE("single-component quantile agrees with an independent gamma quantile") {
  FrequencyPosterior post{1.0, 37.5, 999.0, 4.2};
  boost::math::gamma_distribution<double> ref(post.shape1, 1.0 / post.rate);
  for (double q : {0.05, 0.5, 0.95}) {
    double x = posterior_quantile(post, q);
    CHECK(x == doctest::Approx(boost::math::quantile(ref, q)).epsilon(1e-8));
  }
}

TEST_CASE("severity quantile handles the Dirac atom") {
  SeverityPosterior post{0.6, 2.0, 3.0, 1.0};
  double below = (1.0 - post.omega) * reg_gamma_cdf(post.shape, post.rate, post.mu);
  // q inside the jump lands exactly on the atom
  double q_mid = below + 0.5 * post.omega;
  CHECK(posterior_quantile(post, q_mid) == doctest::Approx(post.mu).epsilon(1e-9));
  // q beyond the jump solves the continuous branch
  double q_hi = below + post.omega + 0.5 * (1.0 - below - post.omega);
  double x = posterior_quantile(post, q_hi);
  double cdf = post.omega + (1.0 - post.omega) * reg_gamma_cdf(post.shape, post.rate, x);
  CHECK(std::fabs(cdf - q_hi) <= 1e-8);

  SeverityPosterior pure{1.0, 0.7, 3.0, 1.0};
  for (double q : {0.01, 0.5, 0.99}) CHECK(posterior_quantile(pure, q) == 0.7);
}

TEST_CASE("quantiles bracket the mean and match Monte Carlo draws") {
  FrequencyPosterior post = frequency_posterior(kFitted, {4964, 4400});
  double mean = frequency_premium(post);
  double lo = posterior_quantile(post, 0.05);
  double hi = posterior_quantile(post, 0.95);
  CHECK(lo < mean);
  CHECK(mean < hi);
  SplitRng rng(31, 9);
  std::vector<double> draws(200000);
  for (double& d : draws) {
    bool first = rng.uniform() < post.w;
    d = rng.gamma(first ? post.shape1 : post.shape2, post.rate);
  }
  CHECK(oracle::quantile(draws, 0.05) == doctest::Approx(lo).epsilon(5e-3));
  CHECK(oracle::quantile(draws, 0.95) == doctest::Approx(hi).epsilon(5e-3));
}

TEST_CASE("premium schedule with no history quotes the prior product") {
  FrequencyParams fp{0.35, 2.5, 4.0, 0.8};
  SeverityParams sp{0.9, 1.0, 2.0, 1.0};
  ScheduleOptions opts;
  opts.nu_source = ScheduleOptions::NuSource::severity;
  std::vector<PremiumQuote> schedule = premium_schedule(fp, sp, {}, opts);
  REQUIRE(schedule.size() == 1);
  double freq_mean = fp.p * fp.alpha1 / fp.beta +
                     (1.0 - fp.p) * (fp.alpha1 + fp.alpha2) / fp.beta;
  double sev_mean = sp.nu / sp.mu + (1.0 - sp.nu) * sp.sigma / (sp.delta - 1.0);
  CHECK(schedule[0].frequency_mean == doctest::Approx(freq_mean).epsilon(1e-12));
  CHECK(schedule[0].severity_mean == doctest::Approx(sev_mean).epsilon(1e-12));
  CHECK(schedule[0].premium ==
        doctest::Approx(freq_mean * sev_mean).epsilon(1e-12));
  CHECK_FALSE(schedule[0].infinite_mean);
  CHECK(schedule[0].ipr_low <= schedule[0].ipr_high);
}

TEST_CASE("default nu source bridges from the frequency fit") {
  SeverityParams sp{0.5, 1.0, 2.0, 1.0};  // deliberately off
  std::vector<PremiumQuote> schedule = premium_schedule(kFitted, sp, {});
  double nu = nu_from_frequency(kFitted);
  double expected = nu / sp.mu + (1.0 - nu) * sp.sigma / (sp.delta - 1.0);
  CHECK(schedule[0].severity_mean == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("schedule rows condition cumulatively and respect a rolling window") {
  FrequencyParams fp{0.4, 3.0, 5.0, 1.2};
  SeverityParams sp{0.85, 1.1, 2.2, 0.9};
  ClaimHistory history;
  history.counts = {2, 1, 3, 2};
  history.severities = {0.5, 1.8, 0.9, 2.4, 0.3, 1.1, 0.7, 1.9};

  ScheduleOptions opts;
  opts.nu_source = ScheduleOptions::NuSource::severity;
  std::vector<PremiumQuote> expanding = premium_schedule(fp, sp, history, opts);
  REQUIRE(expanding.size() == 5);
  for (const PremiumQuote& quote : expanding) {
    CHECK(quote.premium ==
          doctest::Approx(quote.frequency_mean * quote.severity_mean).epsilon(1e-15));
    CHECK(quote.ipr_low <= quote.ipr_high);
  }
  // row 2 conditions on exactly the first two periods
  std::vector<long long> first_two{2, 1};
  std::vector<double> first_sev{0.5, 1.8, 0.9};
  CHECK(expanding[2].frequency_mean ==
        doctest::Approx(frequency_premium(frequency_posterior(fp, first_two)))
            .epsilon(1e-14));
  CHECK(expanding[2].severity_mean ==
        doctest::Approx(severity_premium(severity_posterior(sp, first_sev)))
            .epsilon(1e-14));

  opts.rolling_window = 2;
  std::vector<PremiumQuote> rolling = premium_schedule(fp, sp, history, opts);
  std::vector<long long> last_two{3, 2};
  std::vector<double> last_sev{2.4, 0.3, 1.1, 0.7, 1.9};
  CHECK(rolling[4].frequency_mean ==
        doctest::Approx(frequency_premium(frequency_posterior(fp, last_two)))
            .epsilon(1e-14));
  CHECK(rolling[4].severity_mean ==
        doctest::Approx(severity_premium(severity_posterior(sp, last_sev)))
            .epsilon(1e-14));
}

TEST_CASE("infinite-mean marker clears once claims arrive") {
  FrequencyParams fp{0.4, 3.0, 5.0, 1.2};
  SeverityParams sp{0.9039196, 1.0, 0.3, 0.5};
  ClaimHistory history;
  history.counts = {0, 2};
  history.severities = {1.1, 0.4};
  ScheduleOptions opts;
  opts.nu_source = ScheduleOptions::NuSource::severity;
  opts.mc_draws = 20000;
  std::vector<PremiumQuote> schedule = premium_schedule(fp, sp, history, opts);
  REQUIRE(schedule.size() == 3);
  CHECK(schedule[0].infinite_mean);
  CHECK(std::isinf(schedule[0].severity_mean));
  CHECK(schedule[1].infinite_mean);  // a zero-count period adds no claims
  CHECK_FALSE(schedule[2].infinite_mean);
  CHECK(std::isfinite(schedule[2].premium));
}

TEST_CASE("schedule validates its inputs") {
  FrequencyParams fp{0.4, 3.0, 5.0, 1.2};
  SeverityParams sp{0.85, 1.1, 2.2, 0.9};
  ClaimHistory bad;
  bad.counts = {2, 2};
  bad.severities = {1.0, 2.0, 3.0};  // grouping mismatch
  CHECK_THROWS_AS(premium_schedule(fp, sp, bad), std::invalid_argument);
  ScheduleOptions opts;
  opts.ipr_level = 1.0;
  CHECK_THROWS_AS(premium_schedule(fp, sp, {}, opts), std::domain_error);
  opts = ScheduleOptions{};
  opts.mc_draws = 1;
  CHECK_THROWS_AS(premium_schedule(fp, sp, {}, opts), std::domain_error);
}

TEST_CASE("schedule is deterministic in the seed") {
  FrequencyParams fp{0.4, 3.0, 5.0, 1.2};
  SeverityParams sp{0.85, 1.1, 2.2, 0.9};
  ClaimHistory history;
  history.counts = {2, 3};
  history.severities = {0.5, 1.8, 0.9, 2.4, 0.3};
  ScheduleOptions opts;
  opts.mc_draws = 5000;
  opts.seed = 424242;
  std::vector<PremiumQuote> a = premium_schedule(fp, sp, history, opts);
  std::vector<PremiumQuote> b = premium_schedule(fp, sp, history, opts);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].ipr_low == b[i].ipr_low);
    CHECK(a[i].ipr_high == b[i].ipr_high);
  }
}

TEST_CASE("golden schedule regression") {
  SimConfig cfg;
  cfg.seed = 20240811;
  cfg.periods = 6;
  cfg.frequency = kFitted;
  cfg.severity = SeverityParams{0.9039196, 1.0, 2.0, 1.0};
  cfg.scenario = Scenario::finite_mean;
  ClaimHistory history = simulate_history(cfg);

  ScheduleOptions opts;
  opts.seed = 99;
  std::vector<PremiumQuote> schedule =
      premium_schedule(cfg.frequency, cfg.severity, history, opts);
  REQUIRE(schedule.size() == 7);

  // the closed-form means must agree with the independent quadrature oracle
  std::vector<long long> all_counts = history.counts;
  double mean_quad = freq_mean_by_quadrature(kFitted, all_counts);
  CHECK(schedule[6].frequency_mean == doctest::Approx(mean_quad).epsilon(1e-6));

  const char* write = std::getenv("MIXRATE_WRITE_GOLDEN");
  std::string path = std::string(MIXRATE_TEST_DATA_DIR) + "/golden_schedule.csv";
  if (write && std::string(write) == "1") {
    std::ofstream out(path);
    out.precision(17);
    out << "period,frequency_mean,severity_mean,premium,ipr_low,ipr_high,infinite\n";
    for (std::size_t t = 0; t < schedule.size(); ++t) {
      const PremiumQuote& q = schedule[t];
      out << t << ',' << q.frequency_mean << ',' << q.severity_mean << ','
          << q.premium << ',' << q.ipr_low << ',' << q.ipr_high << ','
          << (q.infinite_mean ? 1 : 0) << '\n';
    }
    MESSAGE("golden schedule rewritten");
    return;
  }

  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing golden file: run with MIXRATE_WRITE_GOLDEN=1");
  std::string line;
  std::getline(in, line);  // header
  for (std::size_t t = 0; t < schedule.size(); ++t) {
    REQUIRE(std::getline(in, line));
    std::istringstream row(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(row, cell, ',')) vals.push_back(std::stod(cell));
    REQUIRE(vals.size() == 7);
    const PremiumQuote& q = schedule[t];
    CHECK(vals[0] == static_cast<double>(t));
    CHECK(q.frequency_mean == doctest::Approx(vals[1]).epsilon(1e-12));
    CHECK(q.severity_mean == doctest::Approx(vals[2]).epsilon(1e-12));
    CHECK(q.premium == doctest::Approx(vals[3]).epsilon(1e-12));
    CHECK(q.ipr_low == doctest::Approx(vals[4]).epsilon(1e-12));
    CHECK(q.ipr_high == doctest::Approx(vals[5]).epsilon(1e-12));
    CHECK(q.infinite_mean == (vals[6] != 0.0));
  }
}

}  // TEST_SUITE
