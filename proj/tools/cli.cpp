#include "qtomo/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qtomo/errors.hpp"
#include "qtomo/estimators.hpp"
#include "qtomo/gibbs.hpp"
#include "qtomo/harness.hpp"
#include "qtomo/measurement.hpp"
#include "qtomo/states.hpp"

namespace qtomo::cli {

namespace {

// Writes to `path`, or to `fallback` when path is empty or "-".
template <typename Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& write) {
  if (path.empty() || path == "-") {
    write(fallback);
    return;
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open " + path + " for writing");
  write(os);
  if (!os) throw Error("write to " + path + " failed");
}

struct SimulateArgs {
  int n = 1;
  std::string state;
  std::int64_t m = 0;
  std::uint64_t seed = 1;
  double w = 0.98;
  std::string out;
  std::string truth_out;
};

void do_simulate(const SimulateArgs& a, std::ostream& out) {
  StateScenario scenario = StateScenario::parse(a.state);
  scenario.mixing_weight = a.w;
  Rng truth_rng = make_rng(a.seed, {1});
  const DensityMatrix truth = generate_state(scenario, a.n, truth_rng);
  const Dataset data = simulate_dataset(truth, a.m, make_rng(a.seed, {2})());
  emit(a.out, out, [&](std::ostream& os) { write_dataset(os, data); });
  if (!a.truth_out.empty()) {
    nlohmann::json j = to_json(truth);
    j["state"] = scenario.name();
    j["seed"] = a.seed;
    emit(a.truth_out, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
  }
}

struct EstimateArgs {
  std::string data;
  std::string estimator;
  std::string loss;
  std::string lambda_rule;
  std::optional<double> lambda;
  double alpha = 0.5;
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 2000;
  std::int64_t thinning = 1;
  double halfwidth = 0.5;
  std::uint64_t seed = 1;
  std::optional<double> tau;
  std::string out;
  std::string trace_out;
};

void do_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  if (!a.estimator.empty() && !a.loss.empty() && a.estimator != a.loss)
    throw DomainError("--estimator and --loss disagree");
  const std::string name = !a.loss.empty() ? a.loss : (a.estimator.empty() ? "inversion" : a.estimator);
  const EstimatorKind kind = parse_estimator(name);
  const Dataset data = load_dataset(a.data);
  const int n = data.qubits();
  const std::int64_t m = data.shots_per_setting();
  const ProbabilityTable freqs = empirical_frequencies(data);

  nlohmann::json params;
  params["m"] = m;
  nlohmann::json diagnostics;
  Matrix estimate;
  switch (kind) {
    case EstimatorKind::Inversion:
      estimate = inversion_estimator(freqs);
      break;
    case EstimatorKind::Thresholding: {
      const double tau = a.tau ? *a.tau : default_threshold(n, m);
      params["tau"] = tau;
      estimate = thresholding_estimator(freqs, tau).matrix();
      break;
    }
    case EstimatorKind::Prob:
    case EstimatorKind::Dens: {
      const LossType type = kind == EstimatorKind::Prob ? LossType::Prob : LossType::Dens;
      const LambdaRule rule = a.lambda_rule.empty() ? default_lambda_rule(type) : parse_lambda_rule(a.lambda_rule);
      const double lambda = a.lambda ? *a.lambda : lambda_for_rule(rule, n, m);
      const LossKind loss = type == LossType::Prob ? LossKind::prob(freqs) : LossKind::dens(freqs);
      SamplerConfig sc;
      sc.lambda = lambda;
      sc.iterations = a.iterations;
      sc.burn_in = a.burn_in;
      sc.thinning = a.thinning;
      sc.seed = a.seed;
      sc.proposal_halfwidth = a.halfwidth;
      sc.record_trace = !a.trace_out.empty();
      const PriorParams prior = PriorParams::symmetric(static_cast<Eigen::Index>(ipow(2, n)), a.alpha);
      for (const auto& w : check_prior_assumption(prior).warnings) err << "note: " << w << '\n';
      const GibbsOutput result = run_chain(loss, sc, prior);
      estimate = result.estimate.matrix();
      params["lambda"] = lambda;
      params["lambda_rule"] = a.lambda ? std::string("fixed") : to_string(rule);
      params["alpha"] = a.alpha;
      params["iterations"] = a.iterations;
      params["burn_in"] = a.burn_in;
      params["thinning"] = a.thinning;
      params["proposal_halfwidth"] = a.halfwidth;
      params["seed"] = a.seed;
      diagnostics["accept_rate_y"] = result.accept_rate_y;
      diagnostics["accept_rate_v"] = result.accept_rate_v;
      diagnostics["final_loss"] = result.loss_trace.back();
      diagnostics["samples"] = result.samples;
      if (!a.trace_out.empty())
        emit(a.trace_out, out, [&](std::ostream& os) { write_chain_trace(os, result); });
      break;
    }
  }
  nlohmann::json j = to_json(estimate);
  j["estimator"] = to_string(kind);
  j["params"] = params;
  if (!diagnostics.empty()) j["diagnostics"] = diagnostics;
  emit(a.out, out, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
}

struct BenchmarkArgs {
  std::string config;
  std::string out;
  bool timing = false;
  int threads = 0;
  bool serial = false;
};

void do_benchmark(const BenchmarkArgs& a, std::ostream& out) {
  ExperimentConfig c = load_config(a.config);
  apply_env_overrides(c);
  if (a.timing) c.record_timing = true;
  if (a.threads > 0) c.threads = a.threads;
  const auto records = a.serial ? serial::run_replicates(c) : run_replicates(c);
  const auto rows = aggregate(c, records);
  emit(a.out, out, [&](std::ostream& os) { write_results_csv(os, rows); });
}

struct EigenArgs {
  std::string config;
  std::optional<int> n;
  std::optional<std::int64_t> m;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> iterations;
  std::optional<std::int64_t> burn_in;
  std::string out;
};

void do_eigenvalues(const EigenArgs& a, std::ostream& out) {
  ExperimentConfig c;
  if (!a.config.empty()) {
    c = load_config(a.config);
  } else {
    c.n = 3;
    c.m_values = {200};
    c.estimators = {EstimatorKind::Inversion, EstimatorKind::Prob, EstimatorKind::Dens};
  }
  apply_env_overrides(c);
  if (a.n) c.n = *a.n;
  if (a.m) c.m_values = {*a.m};
  if (a.seed) c.seed = *a.seed;
  if (a.iterations) c.iterations = *a.iterations;
  if (a.burn_in) c.burn_in = *a.burn_in;
  const auto cols = eigenvalue_report(c);
  emit(a.out, out, [&](std::ostream& os) { write_eigenvalues_csv(os, cols); });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"qtomo: quantum state tomography with linear inversion and pseudo-Bayesian estimators"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Draw a true state and simulate complete Pauli measurement counts");
  simulate->add_option("--n", sim.n, "Number of qubits")->required()->check(CLI::Range(1, 6));
  simulate->add_option("--state", sim.state, "True state: pure, rank2, approx_rank2, maximally_mixed")->required();
  simulate->add_option("--m", sim.m, "Shots per setting")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--w", sim.w, "Mixing weight for approx_rank2")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--out", sim.out, "Dataset CSV path (default: stdout)");
  simulate->add_option("--truth-out", sim.truth_out, "Write the true state as JSON");

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "Estimate the density matrix from a dataset CSV");
  estimate->add_option("--data", est.data, "Dataset CSV")->required();
  estimate->add_option("--estimator", est.estimator, "inversion, thresholding, prob or dens (default inversion)");
  estimate->add_option("--loss", est.loss, "Shorthand for --estimator prob|dens");
  estimate->add_option("--lambda-rule", est.lambda_rule, "m2, N4 or theory (default: m2 for prob, N4 for dens)");
  estimate->add_option("--lambda", est.lambda, "Fixed inverse temperature (overrides --lambda-rule)");
  estimate->add_option("--alpha", est.alpha, "Dirichlet parameter, broadcast to all d weights")->capture_default_str();
  estimate->add_option("--iterations", est.iterations, "MCMC sweeps including burn-in")->capture_default_str();
  estimate->add_option("--burn-in", est.burn_in, "Sweeps discarded before averaging")->capture_default_str();
  estimate->add_option("--thinning", est.thinning, "Average every k-th sweep")->capture_default_str();
  estimate->add_option("--halfwidth", est.halfwidth, "Half-width h of the log-uniform Y proposal")->capture_default_str();
  estimate->add_option("--seed", est.seed, "Chain seed")->capture_default_str();
  estimate->add_option("--tau", est.tau, "Eigenvalue threshold for thresholding (default 2 sqrt(log(2d) d / N))");
  estimate->add_option("--out", est.out, "Estimate JSON path (default: stdout)");
  estimate->add_option("--trace-out", est.trace_out, "Chain trace CSV (prob/dens only)");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "Run an MSE benchmark grid from a config file");
  benchmark->add_option("--config", bench.config, "Config file (key = value)")->required();
  benchmark->add_option("--out", bench.out, "results.csv path (default: stdout)");
  benchmark->add_flag("--timing", bench.timing, "Record estimator wall time (output no longer reproducible)");
  benchmark->add_option("--threads", bench.threads, "OpenMP threads (0: default)");
  benchmark->add_flag("--serial", bench.serial, "Use the serial reference driver");

  EigenArgs eig;
  auto* eigen = app.add_subcommand("eigenvalues", "Eigenvalues of estimates for an approximate rank-2 truth");
  eigen->add_option("--config", eig.config, "Optional config file; flags below override it");
  eigen->add_option("--n", eig.n, "Number of qubits (default 3)");
  eigen->add_option("--m", eig.m, "Shots per setting (default 200)");
  eigen->add_option("--seed", eig.seed, "Master seed");
  eigen->add_option("--iterations", eig.iterations, "MCMC sweeps");
  eigen->add_option("--burn-in", eig.burn_in, "Sweeps discarded before averaging");
  eigen->add_option("--out", eig.out, "eigenvalues.csv path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*simulate) do_simulate(sim, out);
    else if (*estimate) do_estimate(est, out, err);
    else if (*benchmark) do_benchmark(bench, out);
    else if (*eigen) do_eigenvalues(eig, out);
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kFailure;
  }
  return kOk;
}

}  // namespace qtomo::cli
