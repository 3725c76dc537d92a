#include "mixrate/gof.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mixrate/rng.hpp"

namespace mixrate {

namespace {

constexpr double kCdfTailTol = 1e-12;
constexpr std::size_t kMaxGrid = 5000000;
constexpr std::uint64_t kBootstrapTag = 4;

struct ModelGrid {
  std::vector<double> pmf;
  std::vector<double> cdf;
};

// support grid 0..K where K covers both the observed maximum and the point
// where the model CDF clears 1 - 1e-12; capped so pathological parameter
// sets cannot spin forever (statistics stay well defined on a shorter grid)
ModelGrid build_grid(const FrequencyParams& fp, long long max_count) {
  ModelGrid grid;
  double cum = 0.0;
  for (long long j = 0;; ++j) {
    double p = frequency_pmf(fp, j);
    cum += p;
    grid.pmf.push_back(p);
    grid.cdf.push_back(std::min(cum, 1.0));
    if (cum > 1.0 - kCdfTailTol && j >= max_count) break;
    if (grid.pmf.size() >= kMaxGrid) break;
  }
  return grid;
}

std::vector<double> empirical_cdf(const std::vector<long long>& counts,
                                  std::size_t grid_size) {
  std::vector<double> cdf(grid_size, 0.0);
  for (long long n : counts) {
    if (n >= 0 && static_cast<std::size_t>(n) < grid_size) {
      cdf[static_cast<std::size_t>(n)] += 1.0;
    }
  }
  double cum = 0.0;
  double m = static_cast<double>(counts.size());
  for (double& c : cdf) {
    cum += c;
    c = cum / m;
  }
  return cdf;
}

}  // namespace

GofStatistics gof_statistics(const std::vector<double>& emp_cdf,
                             const std::vector<double>& model_pmf,
                             const std::vector<double>& model_cdf,
                             double sample_size) {
  if (emp_cdf.size() != model_pmf.size() || emp_cdf.size() != model_cdf.size()) {
    throw std::invalid_argument("gof_statistics: grid size mismatch");
  }
  GofStatistics s;
  double cvm = 0.0, ad = 0.0;
  for (std::size_t j = 0; j < emp_cdf.size(); ++j) {
    double z = emp_cdf[j] - model_cdf[j];
    s.ks = std::max(s.ks, std::fabs(z));
    double zz = model_pmf[j] * z * z;
    cvm += zz;
    double denom = model_cdf[j] * (1.0 - model_cdf[j]);
    if (denom > 0.0) ad += zz / denom;
  }
  s.cvm = sample_size * cvm;
  s.ad = sample_size * ad;
  return s;
}

GofReport gof_counts(const std::vector<long long>& counts,
                     const FrequencyParams& params, int replicates,
                     std::uint64_t seed) {
  if (counts.empty()) throw std::invalid_argument("gof_counts: counts empty");
  if (replicates < 99) throw std::invalid_argument("gof_counts: need >= 99 replicates");
  validate(params);

  long long max_count = 0;
  for (long long n : counts) {
    if (n < 0) throw std::domain_error("gof_counts: counts must be >= 0");
    max_count = std::max(max_count, n);
  }

  // fixed-parameter bootstrap shares one model grid across all replicates
  ModelGrid grid = build_grid(params, max_count);
  double m = static_cast<double>(counts.size());
  GofStatistics observed =
      gof_statistics(empirical_cdf(counts, grid.pmf.size()), grid.pmf, grid.cdf, m);

  int ge_ks = 0, ge_cvm = 0, ge_ad = 0;
  std::vector<long long> sim(counts.size());
  for (int r = 0; r < replicates; ++r) {
    SplitRng rng = SplitRng::substream(seed, kBootstrapTag, static_cast<std::uint64_t>(r));
    for (long long& n : sim) {
      double shape = rng.uniform() < params.p ? params.alpha1
                                              : params.alpha1 + params.alpha2;
      n = rng.poisson(rng.gamma(shape, params.beta));
    }
    GofStatistics star =
        gof_statistics(empirical_cdf(sim, grid.pmf.size()), grid.pmf, grid.cdf, m);
    if (star.ks >= observed.ks) ++ge_ks;
    if (star.cvm >= observed.cvm) ++ge_cvm;
    if (star.ad >= observed.ad) ++ge_ad;
  }

  GofReport report;
  report.ks = observed.ks;
  report.cvm = observed.cvm;
  report.ad = observed.ad;
  double denom = static_cast<double>(replicates) + 1.0;
  report.p_ks = (1.0 + ge_ks) / denom;
  report.p_cvm = (1.0 + ge_cvm) / denom;
  report.p_ad = (1.0 + ge_ad) / denom;
  report.bootstrap_replicates = replicates;
  report.variant = "choulakian-discrete, fixed-parameter bootstrap";
  return report;
}

}  // namespace mixrate
