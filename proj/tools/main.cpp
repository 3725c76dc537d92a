#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "io.hpp"
#include "mixrate/emfit.hpp"
#include "mixrate/errors.hpp"
#include "mixrate/globallik.hpp"
#include "mixrate/gof.hpp"
#include "mixrate/models.hpp"
#include "mixrate/posterior.hpp"
#include "mixrate/simulate.hpp"

namespace {

using mixtool::fmt;
using mixtool::IoError;
using nlohmann::ordered_json;

// ---- shared EM options ----

struct EmOptions {
  double tolerance = 1e-3;
  int max_iterations = 10000;
  bool loglik_criterion = false;
};

void add_em_options(CLI::App* cmd, EmOptions& o) {
  cmd->add_option("--tolerance", o.tolerance,
                  "Convergence tolerance on the max-abs parameter change")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--max-iterations", o.max_iterations, "EM iteration cap")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_flag("--loglik-criterion", o.loglik_criterion,
                "Judge convergence on the log-likelihood change instead");
}

mixrate::EmConfig em_config(const EmOptions& o) {
  mixrate::EmConfig cfg;
  cfg.tolerance = o.tolerance;
  cfg.max_iterations = o.max_iterations;
  cfg.loglik_criterion = o.loglik_criterion;
  return cfg;
}

std::vector<double> parse_csv_doubles(const std::string& spec, std::size_t n,
                                      const std::string& usage) {
  std::vector<double> vals;
  std::size_t start = 0;
  while (start <= spec.size()) {
    std::size_t comma = spec.find(',', start);
    std::string field = spec.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      std::size_t used = 0;
      vals.push_back(std::stod(field, &used));
      if (used != field.size()) throw std::invalid_argument(field);
    } catch (const std::exception&) {
      throw std::domain_error(usage + ": '" + field + "' is not a number");
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (vals.size() != n) {
    throw std::domain_error(usage + ": expected " + std::to_string(n) +
                            " comma-separated values");
  }
  return vals;
}

// ---- serialization helpers ----

std::string trace_csv(const std::vector<std::string>& names,
                      const mixrate::EmTrace& trace) {
  std::string out = "iteration";
  for (const auto& name : names) out += "," + name;
  out += ",loglik\n";
  for (std::size_t i = 0; i < trace.params.size(); ++i) {
    out += fmt(static_cast<long long>(i));
    for (double v : trace.params[i]) out += "," + fmt(v);
    out += "," + fmt(trace.loglik[i]) + "\n";
  }
  return out;
}

std::string freq_plot_csv(const std::vector<long long>& counts,
                          const mixrate::FrequencyParams& fit) {
  long long max_n = *std::max_element(counts.begin(), counts.end());
  std::vector<double> empirical(static_cast<std::size_t>(max_n) + 1, 0.0);
  double inv_m = 1.0 / static_cast<double>(counts.size());
  for (long long n : counts) empirical[static_cast<std::size_t>(n)] += inv_m;
  std::string out = "count,empirical_prob,model_prob\n";
  for (long long n = 0; n <= max_n; ++n) {
    out += fmt(n) + "," + fmt(empirical[static_cast<std::size_t>(n)]) + "," +
           fmt(mixrate::frequency_pmf(fit, n)) + "\n";
  }
  return out;
}

double severity_cdf(const mixrate::SeverityParams& sp, double y) {
  double exp_cdf = -std::expm1(-sp.mu * y);
  double lomax_cdf = -std::expm1(-sp.delta * std::log1p(y / sp.sigma));
  return sp.nu * exp_cdf + (1.0 - sp.nu) * lomax_cdf;
}

// equal-width bins up to the empirical 99th percentile plus one tail row;
// the tail row keeps heavy-tailed samples from stretching the bin grid
std::string sev_plot_csv(std::vector<double> ys,
                         const mixrate::SeverityParams& fit) {
  std::sort(ys.begin(), ys.end());
  double n = static_cast<double>(ys.size());
  double hi = ys[static_cast<std::size_t>(0.99 * (n - 1.0))];
  constexpr int kBins = 60;
  double width = hi / kBins;
  std::string out = "bin_low,bin_high,empirical_prob,model_prob\n";
  for (int k = 0; k < kBins; ++k) {
    double lo_edge = width * k;
    double hi_edge = width * (k + 1);
    auto lo_it = std::lower_bound(ys.begin(), ys.end(), lo_edge);
    auto hi_it = std::lower_bound(ys.begin(), ys.end(), hi_edge);
    double emp = static_cast<double>(hi_it - lo_it) / n;
    double model = severity_cdf(fit, hi_edge) - severity_cdf(fit, lo_edge);
    out += fmt(lo_edge) + "," + fmt(hi_edge) + "," + fmt(emp) + "," +
           fmt(model) + "\n";
  }
  auto tail_it = std::lower_bound(ys.begin(), ys.end(), hi);
  double emp_tail = static_cast<double>(ys.end() - tail_it) / n;
  out += fmt(hi) + ",inf," + fmt(emp_tail) + "," +
         fmt(1.0 - severity_cdf(fit, hi)) + "\n";
  return out;
}

// ---- fit-frequency ----

struct FitFreqOptions {
  std::string counts_path;
  std::string out_path;
  std::string trace_path;
  std::string plot_path;
  std::string init_spec = "moments";
  EmOptions em;
};

int cmd_fit_frequency(const FitFreqOptions& o) {
  auto counts = mixtool::read_counts_csv(o.counts_path);

  mixrate::FrequencyParams init{};
  ordered_json init_meta;
  if (o.init_spec == "moments") {
    init = mixrate::moment_init_frequency(counts);
    init_meta["mode"] = "moments";
  } else {
    auto vals = parse_csv_doubles(o.init_spec, 4,
                                  "--init expects moments or alpha1,alpha2,beta,p");
    init = mixrate::FrequencyParams{vals[3], vals[0], vals[1], vals[2]};
    mixrate::validate(init);
    init_meta["mode"] = "explicit";
  }
  init_meta["p"] = init.p;
  init_meta["alpha1"] = init.alpha1;
  init_meta["alpha2"] = init.alpha2;
  init_meta["beta"] = init.beta;

  auto [fit, trace] = mixrate::fit_frequency(counts, init, em_config(o.em));

  ordered_json out{
      {"model", "frequency"},
      {"params",
       {{"p", fit.p},
        {"alpha1", fit.alpha1},
        {"alpha2", fit.alpha2},
        {"beta", fit.beta}}},
      {"init", init_meta},
      {"converged", trace.converged},
      {"iterations", trace.iterations},
      {"loglik", trace.loglik.back()},
      {"periods", counts.size()},
      {"tolerance", o.em.tolerance},
      {"max_iterations", o.em.max_iterations},
  };
  mixtool::write_text(o.out_path, out.dump(2) + "\n");
  if (!o.trace_path.empty()) {
    mixtool::write_text(o.trace_path,
                        trace_csv({"p", "alpha1", "alpha2", "beta"}, trace));
  }
  if (!o.plot_path.empty()) {
    mixtool::write_text(o.plot_path, freq_plot_csv(counts, fit));
  }
  if (!trace.converged) {
    std::cerr << "warning: EM stopped at the iteration cap without meeting "
                 "the tolerance\n";
  }
  return 0;
}

// ---- fit-severity ----

struct FitSevOptions {
  std::string claims_path;
  std::string out_path;
  std::string trace_path;
  std::string plot_path;
  std::string init_spec;
  std::string nu_mode = "free";
  EmOptions em;
};

int cmd_fit_severity(const FitSevOptions& o) {
  auto rows = mixtool::read_claims_csv(o.claims_path);
  std::vector<double> ys;
  ys.reserve(rows.size());
  for (const auto& [period, amount] : rows) ys.push_back(amount);

  mixrate::SeverityParams init{};
  ordered_json init_meta;
  if (o.init_spec.empty()) {
    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    init = mixrate::SeverityParams{0.5, 1.0 / mean, 2.0, mean};
    init_meta["mode"] = "heuristic";
  } else {
    auto vals =
        parse_csv_doubles(o.init_spec, 4, "--init expects nu,mu,delta,sigma");
    init = mixrate::SeverityParams{vals[0], vals[1], vals[2], vals[3]};
    mixrate::validate(init);
    init_meta["mode"] = "explicit";
  }
  init_meta["nu"] = init.nu;
  init_meta["mu"] = init.mu;
  init_meta["delta"] = init.delta;
  init_meta["sigma"] = init.sigma;

  std::optional<double> fixed_nu;
  if (o.nu_mode != "free") {
    const std::string prefix = "fixed:";
    if (o.nu_mode.rfind(prefix, 0) != 0) {
      throw std::domain_error("--nu expects free or fixed:<value>");
    }
    auto vals = parse_csv_doubles(o.nu_mode.substr(prefix.size()), 1,
                                  "--nu fixed:<value>");
    fixed_nu = vals[0];
  }

  auto [fit, trace] =
      mixrate::fit_severity(ys, init, em_config(o.em), fixed_nu);

  ordered_json nu_meta;
  nu_meta["mode"] = fixed_nu ? "fixed" : "free";
  if (fixed_nu) nu_meta["value"] = *fixed_nu;

  ordered_json out{
      {"model", "severity"},
      {"params",
       {{"nu", fit.nu},
        {"mu", fit.mu},
        {"delta", fit.delta},
        {"sigma", fit.sigma}}},
      {"init", init_meta},
      {"nu_mode", nu_meta},
      {"converged", trace.converged},
      {"iterations", trace.iterations},
      {"loglik", trace.loglik.back()},
      {"claims", ys.size()},
      {"tolerance", o.em.tolerance},
      {"max_iterations", o.em.max_iterations},
  };
  mixtool::write_text(o.out_path, out.dump(2) + "\n");
  if (!o.trace_path.empty()) {
    mixtool::write_text(o.trace_path,
                        trace_csv({"nu", "mu", "delta", "sigma"}, trace));
  }
  if (!o.plot_path.empty()) {
    mixtool::write_text(o.plot_path, sev_plot_csv(ys, fit));
  }
  if (!trace.converged) {
    std::cerr << "warning: EM stopped at the iteration cap without meeting "
                 "the tolerance\n";
  }
  return 0;
}

// ---- simulate ----

struct SimulateOptions {
  std::uint64_t seed = 0;
  long long periods = 0;
  double p = 0.0, alpha1 = 0.0, alpha2 = 0.0, beta = 0.0;
  double nu = 0.0, mu = 0.0, delta = 0.0, sigma = 0.0;
  std::string scenario = "finite-mean";
  std::string counts_out;
  std::string claims_out;
};

int cmd_simulate(const SimulateOptions& o) {
  mixrate::SimConfig cfg;
  cfg.seed = o.seed;
  cfg.periods = o.periods;
  cfg.frequency = mixrate::FrequencyParams{o.p, o.alpha1, o.alpha2, o.beta};
  cfg.severity = mixrate::SeverityParams{o.nu, o.mu, o.delta, o.sigma};
  cfg.scenario = o.scenario == "finite-mean"
                     ? mixrate::Scenario::finite_mean
                     : mixrate::Scenario::infinite_mean;
  mixrate::validate(cfg);

  mixrate::ClaimHistory history = mixrate::simulate_history(cfg);

  mixtool::write_stream(o.counts_out, [&](std::ostream& out) {
    out << "period,count\n";
    for (std::size_t t = 0; t < history.counts.size(); ++t) {
      out << fmt(static_cast<long long>(t + 1)) << ','
          << fmt(history.counts[t]) << '\n';
    }
  });
  if (!o.claims_out.empty()) {
    mixtool::write_stream(o.claims_out, [&](std::ostream& out) {
      out << "period,amount\n";
      std::size_t k = 0;
      for (std::size_t t = 0; t < history.counts.size(); ++t) {
        for (long long j = 0; j < history.counts[t]; ++j) {
          out << fmt(static_cast<long long>(t + 1)) << ','
              << fmt(history.severities[k++]) << '\n';
        }
      }
    });
  }
  return 0;
}

// ---- premium ----

struct PremiumOptions {
  std::string counts_path;
  std::string claims_path;
  std::string freq_path;
  std::string sev_path;
  std::string out_path;
  double ipr_level = 0.90;
  int mc_draws = 100000;
  std::uint64_t seed = 0;
  std::string ipr_on = "product";
  std::string window = "expanding";
  std::string nu_source = "frequency";
  std::string format = "csv";
};

int parse_window(const std::string& spec) {
  if (spec == "expanding") return 0;
  const std::string prefix = "rolling:";
  if (spec.rfind(prefix, 0) == 0) {
    auto vals = parse_csv_doubles(spec.substr(prefix.size()), 1,
                                  "--window rolling:<W>");
    int w = static_cast<int>(vals[0]);
    if (w < 1 || static_cast<double>(w) != vals[0]) {
      throw std::domain_error("--window rolling:<W> needs a positive integer");
    }
    return w;
  }
  throw std::domain_error("--window expects expanding or rolling:<W>");
}

int cmd_premium(const PremiumOptions& o) {
  mixrate::ClaimHistory history =
      mixtool::read_history(o.counts_path, o.claims_path);
  mixrate::FrequencyParams fp = mixtool::read_freq_params(o.freq_path);
  mixrate::SeverityParams sp = mixtool::read_sev_params(o.sev_path);

  mixrate::ScheduleOptions sopts;
  sopts.ipr_level = o.ipr_level;
  sopts.mc_draws = o.mc_draws;
  sopts.seed = o.seed;
  sopts.ipr_target = o.ipr_on == "product"
                         ? mixrate::ScheduleOptions::IprTarget::product
                         : mixrate::ScheduleOptions::IprTarget::severity;
  sopts.rolling_window = parse_window(o.window);
  sopts.nu_source = o.nu_source == "frequency"
                        ? mixrate::ScheduleOptions::NuSource::frequency
                        : mixrate::ScheduleOptions::NuSource::severity;

  auto schedule = mixrate::premium_schedule(fp, sp, history, sopts);

  bool have_sev = !history.severities.empty();
  std::vector<long long> cum_count(schedule.size(), 0);
  std::vector<double> cum_cost(schedule.size(), 0.0);
  std::size_t k = 0;
  for (std::size_t t = 1; t < schedule.size(); ++t) {
    cum_count[t] = cum_count[t - 1] + history.counts[t - 1];
    cum_cost[t] = cum_cost[t - 1];
    for (long long j = 0; j < history.counts[t - 1] && have_sev; ++j) {
      cum_cost[t] += history.severities[k++];
    }
  }

  if (o.format == "csv") {
    mixtool::write_stream(o.out_path, [&](std::ostream& out) {
      out << "period,cumulative_count,cumulative_cost,frequency_mean,"
             "severity_mean,premium,ipr_low,ipr_high,infinite\n";
      for (std::size_t t = 0; t < schedule.size(); ++t) {
        const auto& q = schedule[t];
        out << fmt(static_cast<long long>(t)) << ',' << fmt(cum_count[t])
            << ',' << (have_sev ? fmt(cum_cost[t]) : std::string{}) << ','
            << fmt(q.frequency_mean) << ',' << fmt(q.severity_mean) << ','
            << fmt(q.premium) << ',' << fmt(q.ipr_low) << ','
            << fmt(q.ipr_high) << ',' << (q.infinite_mean ? '1' : '0')
            << '\n';
      }
    });
  } else {
    ordered_json rows = ordered_json::array();
    for (std::size_t t = 0; t < schedule.size(); ++t) {
      const auto& q = schedule[t];
      ordered_json row{
          {"period", t},
          {"cumulative_count", cum_count[t]},
          {"cumulative_cost",
           have_sev ? ordered_json(cum_cost[t]) : ordered_json(nullptr)},
          {"frequency_mean", q.frequency_mean},
          {"severity_mean", q.infinite_mean ? ordered_json(nullptr)
                                            : ordered_json(q.severity_mean)},
          {"premium",
           q.infinite_mean ? ordered_json(nullptr) : ordered_json(q.premium)},
          {"ipr_low", q.ipr_low},
          {"ipr_high", q.ipr_high},
          {"infinite", q.infinite_mean},
      };
      rows.push_back(row);
    }
    ordered_json out{
        {"schedule", rows},
        {"options",
         {{"ipr_level", o.ipr_level},
          {"mc_draws", o.mc_draws},
          {"seed", o.seed},
          {"ipr_on", o.ipr_on},
          {"window", o.window},
          {"nu_source", o.nu_source}}},
    };
    mixtool::write_text(o.out_path, out.dump(2) + "\n");
  }
  return 0;
}

// ---- gof ----

struct GofOptions {
  std::string counts_path;
  std::string params_path;
  std::string out_path;
  int replicates = 999;
  std::uint64_t seed = 0;
};

int cmd_gof(const GofOptions& o) {
  auto counts = mixtool::read_counts_csv(o.counts_path);
  mixrate::FrequencyParams fp = mixtool::read_freq_params(o.params_path);
  mixrate::GofReport report =
      mixrate::gof_counts(counts, fp, o.replicates, o.seed);
  ordered_json out{
      {"statistics",
       {{"ks", report.ks}, {"cvm", report.cvm}, {"ad", report.ad}}},
      {"p_values",
       {{"ks", report.p_ks}, {"cvm", report.p_cvm}, {"ad", report.p_ad}}},
      {"replicates", report.bootstrap_replicates},
      {"variant", report.variant},
      {"seed", o.seed},
  };
  mixtool::write_text(o.out_path, out.dump(2) + "\n");
  return 0;
}

// ---- loglik ----

struct LoglikOptions {
  std::string counts_path;
  std::string claims_path;
  std::string freq_path;
  std::string sev_path;
  std::string out_path;
};

int cmd_loglik(const LoglikOptions& o) {
  mixrate::ClaimHistory history =
      mixtool::read_history(o.counts_path, o.claims_path);
  mixrate::FrequencyParams fp = mixtool::read_freq_params(o.freq_path);
  mixrate::SeverityParams sp = mixtool::read_sev_params(o.sev_path);

  double freq_ll = 0.0;
  for (long long n : history.counts) {
    freq_ll += std::log(mixrate::frequency_pmf(fp, n));
  }
  ordered_json out;
  if (o.claims_path.empty()) {
    out = ordered_json{{"frequency_loglik", freq_ll},
                       {"severity_loglik", nullptr},
                       {"total_loglik", freq_ll}};
  } else {
    double total = mixrate::global_loglik(fp, sp, history);
    out = ordered_json{{"frequency_loglik", freq_ll},
                       {"severity_loglik", total - freq_ll},
                       {"total_loglik", total}};
  }
  mixtool::write_text(o.out_path, out.dump(2) + "\n");
  return 0;
}

// ---- dispatch plumbing ----

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const mixrate::SolverFailure& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual()
              << ")\n";
    return 3;
  } catch (const mixrate::QuadratureError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const mixrate::DegenerateData& e) {
    std::cerr << "error: " << e.what() << "\n"
              << "hint: the counts show no overdispersion, so a mixed "
                 "Poisson model cannot be identified from them; pass an "
                 "explicit --init or collect more periods\n";
    return 2;
  } catch (const mixrate::InfiniteMean& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

constexpr const char* kFooter =
    "File formats:\n"
    "  counts CSV  header 'period,count', one row per period, periods 1..m\n"
    "  claims CSV  header 'period,amount', one row per claim, amount > 0\n"
    "  params JSON object with 'params' holding p,alpha1,alpha2,beta\n"
    "              (frequency) or nu,mu,delta,sigma (severity); the bare\n"
    "              object is accepted too\n"
    "Exit codes: 0 success, 2 validation, 3 solver failure, 4 I/O.\n"
    "PRICING_SEED sets the default seed where a --seed option exists.\n";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Two-stream claim model tools: EM fitting, simulation, Bayesian "
      "premium schedules and bootstrap goodness of fit"};
  app.require_subcommand(1);
  app.footer(kFooter);

  FitFreqOptions o_ff;
  FitSevOptions o_fs;
  SimulateOptions o_sim;
  PremiumOptions o_prem;
  GofOptions o_gof;
  LoglikOptions o_ll;
  std::string config_path;

  CLI::App* ff = app.add_subcommand(
      "fit-frequency", "Fit the two-component count mixture by EM");
  ff->add_option("--counts", o_ff.counts_path, "counts CSV")->required();
  ff->add_option("--out", o_ff.out_path, "params JSON path (default stdout)");
  ff->add_option("--trace", o_ff.trace_path, "iteration trace CSV path");
  ff->add_option("--plot", o_ff.plot_path, "histogram-vs-model CSV path");
  ff->add_option("--init", o_ff.init_spec, "moments | alpha1,alpha2,beta,p")
      ->capture_default_str();
  add_em_options(ff, o_ff.em);
  ff->add_option("--config", config_path, "key=value option file; explicit flags win");

  CLI::App* fs = app.add_subcommand(
      "fit-severity", "Fit the exponential-Lomax severity mixture by EM");
  fs->add_option("--claims", o_fs.claims_path, "claims CSV")->required();
  fs->add_option("--out", o_fs.out_path, "params JSON path (default stdout)");
  fs->add_option("--trace", o_fs.trace_path, "iteration trace CSV path");
  fs->add_option("--plot", o_fs.plot_path, "histogram-vs-model CSV path");
  fs->add_option("--init", o_fs.init_spec,
                 "nu,mu,delta,sigma (default: a data-driven heuristic)");
  fs->add_option("--nu", o_fs.nu_mode, "free | fixed:<value>")
      ->capture_default_str();
  add_em_options(fs, o_fs.em);
  fs->add_option("--config", config_path, "key=value option file; explicit flags win");

  CLI::App* sim = app.add_subcommand(
      "simulate", "Draw a claim history from given parameters");
  sim->add_option("--seed", o_sim.seed, "RNG seed")
      ->envname("PRICING_SEED")
      ->capture_default_str();
  sim->add_option("--periods", o_sim.periods, "number of periods")
      ->required()
      ->check(CLI::PositiveNumber);
  sim->add_option("--p", o_sim.p, "foreseeable-only mass")->required();
  sim->add_option("--alpha1", o_sim.alpha1, "first intensity shape")
      ->required();
  sim->add_option("--alpha2", o_sim.alpha2, "extra intensity shape")
      ->required();
  sim->add_option("--beta", o_sim.beta, "intensity rate")->required();
  sim->add_option("--nu", o_sim.nu, "exponential severity weight")
      ->required();
  sim->add_option("--mu", o_sim.mu, "exponential severity rate")->required();
  sim->add_option("--delta", o_sim.delta, "Lomax shape")->required();
  sim->add_option("--sigma", o_sim.sigma, "Lomax scale")->required();
  sim->add_option("--scenario", o_sim.scenario,
                  "finite-mean | infinite-mean; must agree with delta")
      ->check(CLI::IsMember({"finite-mean", "infinite-mean"}))
      ->capture_default_str();
  sim->add_option("--counts-out", o_sim.counts_out, "counts CSV path")
      ->required();
  sim->add_option("--claims-out", o_sim.claims_out, "claims CSV path");
  sim->add_option("--config", config_path, "key=value option file; explicit flags win");

  CLI::App* prem = app.add_subcommand(
      "premium", "Per-period Bayesian premium schedule with an IPR band");
  prem->add_option("--counts", o_prem.counts_path, "counts CSV")->required();
  prem->add_option("--claims", o_prem.claims_path,
                   "claims CSV (omit to price severity from the prior)");
  prem->add_option("--freq-params", o_prem.freq_path,
                   "frequency params JSON")
      ->required();
  prem->add_option("--sev-params", o_prem.sev_path, "severity params JSON")
      ->required();
  prem->add_option("--out", o_prem.out_path, "output path (default stdout)");
  prem->add_option("--ipr-level", o_prem.ipr_level,
                   "inter-percentile range level")
      ->capture_default_str();
  prem->add_option("--mc-draws", o_prem.mc_draws,
                   "Monte Carlo draws per interval")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  prem->add_option("--seed", o_prem.seed, "RNG seed for the intervals")
      ->envname("PRICING_SEED")
      ->capture_default_str();
  prem->add_option("--ipr-on", o_prem.ipr_on,
                   "interval on the premium product or on severity alone")
      ->check(CLI::IsMember({"product", "severity"}))
      ->capture_default_str();
  prem->add_option("--window", o_prem.window,
                   "conditioning window: expanding | rolling:<W>")
      ->capture_default_str();
  prem->add_option("--nu-source", o_prem.nu_source,
                   "take nu from the frequency fit or the severity fit")
      ->check(CLI::IsMember({"frequency", "severity"}))
      ->capture_default_str();
  prem->add_option("--format", o_prem.format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  prem->add_option("--config", config_path, "key=value option file; explicit flags win");

  CLI::App* gof = app.add_subcommand(
      "gof", "Parametric bootstrap goodness of fit for a count model");
  gof->add_option("--counts", o_gof.counts_path, "counts CSV")->required();
  gof->add_option("--params", o_gof.params_path, "frequency params JSON")
      ->required();
  gof->add_option("--out", o_gof.out_path, "report JSON path (default stdout)");
  gof->add_option("--replicates", o_gof.replicates, "bootstrap replicates")
      ->capture_default_str();
  gof->add_option("--seed", o_gof.seed, "bootstrap RNG seed")
      ->envname("PRICING_SEED")
      ->capture_default_str();
  gof->add_option("--config", config_path, "key=value option file; explicit flags win");

  CLI::App* ll = app.add_subcommand(
      "loglik", "Joint log-likelihood of a history under given parameters");
  ll->add_option("--counts", o_ll.counts_path, "counts CSV")->required();
  ll->add_option("--claims", o_ll.claims_path, "claims CSV");
  ll->add_option("--freq-params", o_ll.freq_path, "frequency params JSON")
      ->required();
  ll->add_option("--sev-params", o_ll.sev_path, "severity params JSON")
      ->required();
  ll->add_option("--out", o_ll.out_path, "JSON path (default stdout)");
  ll->add_option("--config", config_path, "key=value option file; explicit flags win");

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = mixtool::expand_config_args(std::move(args));
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  std::reverse(args.begin(), args.end());

  try {
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  return run_guarded([&]() -> int {
    if (ff->parsed()) return cmd_fit_frequency(o_ff);
    if (fs->parsed()) return cmd_fit_severity(o_fs);
    if (sim->parsed()) return cmd_simulate(o_sim);
    if (prem->parsed()) return cmd_premium(o_prem);
    if (gof->parsed()) return cmd_gof(o_gof);
    if (ll->parsed()) return cmd_loglik(o_ll);
    return 0;
  });
}
