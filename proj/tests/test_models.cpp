#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "helpers/oracles.hpp"
#include "mixrate/models.hpp"
#include "mixrate/specfun.hpp"

using namespace mixrate;

namespace {

// frequency fit reported for the real portfolio scale
const FrequencyParams kFitted{0.5929959, 97.55820446, 30.14706672, 0.01978072};

double mixture_survival(const SeverityParams& sp, double y) {
  return sp.nu * std::exp(-sp.mu * y) +
         (1.0 - sp.nu) * std::pow(sp.sigma / (sp.sigma + y), sp.delta);
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("validate enforces parameter domains") {
  CHECK_THROWS_AS(validate(FrequencyParams{-0.1, 1.0, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate(FrequencyParams{1.1, 1.0, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate(FrequencyParams{0.5, 0.0, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate(FrequencyParams{0.5, 1.0, 1.0, -1.0}), std::domain_error);
  CHECK_NOTHROW(validate(FrequencyParams{1.0, 1.0, 1.0, 1.0}));  // analytic limit
  CHECK_THROWS_AS(validate(SeverityParams{0.0, 1.0, 1.0, 1.0}), std::domain_error);
  CHECK_THROWS_AS(validate(SeverityParams{0.5, 1.0, 0.0, 1.0}), std::domain_error);
  CHECK_NOTHROW(validate(SeverityParams{1.0, 1.0, 1.0, 1.0}));
}

TEST_CASE("frequency_pmf degenerates to a single NB at p = 1") {
  FrequencyParams fp{1.0, 3.5, 999.0, 2.0};
  CHECK(frequency_pmf(fp, 0) ==
        doctest::Approx(std::pow(fp.beta / (1.0 + fp.beta), fp.alpha1)).epsilon(1e-13));
  for (long long n = 0; n <= 1000; n += 50) {
    double nb = std::exp(nb_log_pmf(fp.alpha1, fp.beta, n));
    CHECK(frequency_pmf(fp, n) == doctest::Approx(nb).epsilon(1e-12));
  }
}

TEST_CASE("frequency_pmf sums to one at the fitted portfolio scale") {
  FrequencyParams fp{0.5929959, 97.5582, 30.1471, 0.01978072};
  double total = 0.0;
  for (long long n = 0; n <= 20000; ++n) total += frequency_pmf(fp, n);
  CHECK(std::fabs(total - 1.0) <= 1e-9);
}

TEST_CASE("frequency_pmf equals the Poisson-Gamma mixture integral") {
  FrequencyParams fp{0.6, 2.0, 3.0, 1.0};
  for (long long n : {0LL, 5LL, 50LL}) {
    double dn = static_cast<double>(n);
    auto log_term = [&](double lam) {
      return dn * std::log(lam) - lam - log_gamma(dn + 1.0) +
             std::log(prior_density(fp, lam));
    };
    auto shifted = oracle::integrate_log_weighted(
        log_term, [](double) { return 1.0; }, 1e-12, 220.0);
    double integral = shifted.value * std::exp(shifted.shift);
    CHECK(frequency_pmf(fp, n) == doctest::Approx(integral).epsilon(1e-8));
  }
}

TEST_CASE("prior_density is the pure Gamma at p = 1 and integrates to one") {
  FrequencyParams pure{1.0, 4.0, 2.0, 1.5};
  for (double lam : {0.1, 1.0, 3.3}) {
    double expected = std::exp(pure.alpha1 * std::log(pure.beta) +
                               (pure.alpha1 - 1.0) * std::log(lam) -
                               pure.beta * lam - log_gamma(pure.alpha1));
    CHECK(prior_density(pure, lam) == doctest::Approx(expected).epsilon(1e-12));
  }
  FrequencyParams fp{0.35, 2.5, 4.0, 0.8};
  double total = oracle::integrate([&](double lam) {
    return lam > 0.0 ? prior_density(fp, lam) : 0.0;
  }, 0.0, 90.0, 1e-11);
  CHECK(std::fabs(total - 1.0) <= 1e-8);
  CHECK_THROWS_AS(prior_density(fp, 0.0), std::domain_error);
  CHECK_THROWS_AS(prior_density(fp, -2.0), std::domain_error);
}

TEST_CASE("prior mean at the fitted parameters reproduces the portfolio mean") {
  double mean = kFitted.p * kFitted.alpha1 / kFitted.beta +
                (1.0 - kFitted.p) * (kFitted.alpha1 + kFitted.alpha2) / kFitted.beta;
  CHECK(std::fabs(mean - 5552.0) <= 1.0);
}

TEST_CASE("severity_density forms and normalization") {
  SeverityParams exp_only{1.0, 2.0, 3.0, 1.0};
  for (double y : {0.05, 0.7, 4.0}) {
    CHECK(severity_density(exp_only, y) ==
          doctest::Approx(2.0 * std::exp(-2.0 * y)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(severity_density(exp_only, 0.0), std::domain_error);

  // numeric mass on (0, Y] must complement the analytic survival at Y,
  // for both the finite-mean and infinite-mean parameter sets
  for (SeverityParams sp : {SeverityParams{0.9039196, 1.0, 2.0, 1.0},
                            SeverityParams{0.9039196, 1.0, 0.3, 0.5}}) {
    double upper = 50.0;
    double mass = oracle::integrate(
        [&](double y) { return y > 0.0 ? severity_density(sp, y) : 0.0; },
        0.0, upper, 1e-11);
    CHECK(std::fabs(mass + mixture_survival(sp, upper) - 1.0) <= 1e-8);
  }
}

TEST_CASE("severity mean is nu/mu + (1-nu) sigma/(delta-1) when delta > 1") {
  SeverityParams sp{0.9039196, 1.0, 2.0, 1.0};
  double upper = 4e5;
  double partial = oracle::integrate(
      [&](double y) { return y > 0.0 ? y * severity_density(sp, y) : 0.0; },
      0.0, upper, 1e-10);
  // tail of y g(y) beyond the cutoff, integrated analytically:
  // int_Y^inf y delta sigma^d/(sigma+y)^{d+1} dy for delta = 2, sigma = 1
  double d = sp.delta, s = sp.sigma;
  double tail = (1.0 - sp.nu) * std::pow(s, d) *
                (upper / std::pow(s + upper, d) +
                 std::pow(s + upper, 1.0 - d) / (d - 1.0));
  double analytic = sp.nu / sp.mu + (1.0 - sp.nu) * s / (d - 1.0);
  CHECK(analytic == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(partial + tail == doctest::Approx(analytic).epsilon(1e-7));
}

TEST_CASE("nu_from_frequency bridges the fitted frequency parameters") {
  CHECK(std::fabs(nu_from_frequency(kFitted) - 0.9039196) <= 1e-6);
  CHECK(nu_from_frequency(FrequencyParams{1.0, 5.0, 7.0, 1.0}) == 1.0);
  CHECK(nu_from_frequency(FrequencyParams{0.123, 5.0, 1e-280, 1.0}) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // strictly between p and 1 for interior parameters
  for (double p : {0.1, 0.5, 0.9}) {
    double nu = nu_from_frequency(FrequencyParams{p, 3.0, 2.0, 1.0});
    CHECK(nu > p);
    CHECK(nu < 1.0);
  }
}

}  // TEST_SUITE
