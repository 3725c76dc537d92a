#include <benchmark/benchmark.h>

#include <vector>

#include "mixrate/emfit.hpp"
#include "mixrate/globallik.hpp"
#include "mixrate/gof.hpp"
#include "mixrate/models.hpp"
#include "mixrate/posterior.hpp"
#include "mixrate/simulate.hpp"

using namespace mixrate;

namespace {

const FrequencyParams kPortfolio{0.5929959, 97.55820446, 30.14706672,
                                 0.01978072};
const FrequencyParams kSmall{0.6, 3.0, 2.0, 0.8};
const SeverityParams kSeverity{0.9039196, 1.0, 2.0, 1.0};

SimConfig sim_config(std::uint64_t seed, long long periods) {
  SimConfig cfg;
  cfg.seed = seed;
  cfg.periods = periods;
  cfg.frequency = kSmall;
  cfg.severity = kSeverity;
  return cfg;
}

}  // namespace

static void BM_FrequencyPmf(benchmark::State& state) {
  long long n = 5400;
  for (auto _ : state) {
    benchmark::DoNotOptimize(frequency_pmf(kPortfolio, n));
  }
}
BENCHMARK(BM_FrequencyPmf);

static void BM_SeverityDensity(benchmark::State& state) {
  double y = 1.7;
  for (auto _ : state) {
    benchmark::DoNotOptimize(severity_density(kSeverity, y));
  }
}
BENCHMARK(BM_SeverityDensity);

static void BM_FreqEmCycle(benchmark::State& state) {
  std::vector<long long> counts =
      simulate_counts(sim_config(7, state.range(0)));
  FrequencyParams at = kSmall;
  EmConfig cfg;
  for (auto _ : state) {
    std::vector<double> tau = freq_responsibilities(at, counts);
    benchmark::DoNotOptimize(freq_m_step(counts, tau, at, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FreqEmCycle)->Arg(500)->Arg(5000);

static void BM_SevEmCycle(benchmark::State& state) {
  std::vector<double> ys = simulate_severities(
      sim_config(8, 1), static_cast<std::size_t>(state.range(0)));
  SeverityParams at = kSeverity;
  EmConfig cfg;
  for (auto _ : state) {
    std::vector<double> tau = sev_responsibilities(at, ys);
    benchmark::DoNotOptimize(sev_m_step(ys, tau, at, cfg));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SevEmCycle)->Arg(10000)->Arg(100000);

static void BM_SimulateHistory(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_history(sim_config(9, state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulateHistory)->Arg(1000)->Arg(10000);

static void BM_PremiumSchedule(benchmark::State& state) {
  ClaimHistory history = simulate_history(sim_config(10, 20));
  ScheduleOptions opts;
  opts.seed = 11;
  opts.mc_draws = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        premium_schedule(kSmall, kSeverity, history, opts));
  }
}
BENCHMARK(BM_PremiumSchedule)->Arg(10000)->Arg(100000);

static void BM_GofCounts(benchmark::State& state) {
  std::vector<long long> counts = simulate_counts(sim_config(12, 300));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gof_counts(counts, kSmall, static_cast<int>(state.range(0)), 13));
  }
}
BENCHMARK(BM_GofCounts)->Arg(99)->Arg(999);

static void BM_GlobalLoglik(benchmark::State& state) {
  ClaimHistory history = simulate_history(sim_config(14, 1000));
  for (auto _ : state) {
    benchmark::DoNotOptimize(global_loglik(kSmall, kSeverity, history));
  }
}
BENCHMARK(BM_GlobalLoglik);

static void BM_JointPairDensity(benchmark::State& state) {
  auto f = [](double y) { return 1.3 * std::exp(-1.3 * y); };
  auto g = [](double y) { return 2.0 / ((1.0 + y) * (1.0 + y) * (1.0 + y)); };
  ArrivalPair pair{0.7, 1.4};
  for (auto _ : state) {
    benchmark::DoNotOptimize(joint_pair_density(kSmall, f, g, pair));
  }
}
BENCHMARK(BM_JointPairDensity);

BENCHMARK_MAIN();
