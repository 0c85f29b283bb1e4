#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qtomo/estimators.hpp"
#include "qtomo/gibbs.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

enum class EstimatorKind { Inversion, Thresholding, Prob, Dens };

std::string to_string(EstimatorKind k);
EstimatorKind parse_estimator(std::string_view s);

/// How the squared error is reported. Frobenius is ||est - truth||_F^2;
/// Entrywise divides by d^2 (mean squared entry), the scale commonly used
/// in tomography benchmark tables.
enum class MseScale { Frobenius, Entrywise };

std::string to_string(MseScale s);
MseScale parse_mse_scale(std::string_view s);

/// A lambda choice: a named rule or a fixed number.
struct LambdaChoice {
  LambdaRule rule = LambdaRule::HalfM;
  std::optional<double> value;

  double resolve(int n, std::int64_t m) const { return value ? *value : lambda_for_rule(rule, n, m); }
  std::string str() const;
  static LambdaChoice parse(std::string_view s);
};

struct ExperimentConfig {
  int n = 2;
  std::vector<std::int64_t> m_values{20, 200, 1000, 2000};
  std::vector<StateScenario> scenarios;
  std::vector<EstimatorKind> estimators{EstimatorKind::Inversion, EstimatorKind::Thresholding,
                                        EstimatorKind::Prob, EstimatorKind::Dens};
  int replications = 10;
  std::uint64_t seed = 1;
  std::int64_t iterations = 10000;
  std::int64_t burn_in = 2000;
  std::int64_t thinning = 1;
  double alpha = 0.5;
  double proposal_halfwidth = 0.5;
  LambdaChoice lambda_prob{LambdaRule::HalfM, std::nullopt};
  LambdaChoice lambda_dens{LambdaRule::QuarterN, std::nullopt};
  std::optional<double> tau;  ///< empty: default_threshold(n, m)
  double mixing_weight = 0.98;
  bool fixed_state = false;
  MseScale mse_scale = MseScale::Frobenius;
  bool record_timing = false;
  int threads = 0;  ///< 0: OpenMP default

  ExperimentConfig();
  void validate() const;
  SamplerConfig sampler(double lambda, std::uint64_t seed) const;
};

/// Flat "key = value" text, '#' comments. Keys mirror ExperimentConfig
/// fields; lists are comma separated. See README for the full list.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig load_config(const std::filesystem::path& path);
/// QTOMO_SEED, when set, replaces the seed.
void apply_env_overrides(ExperimentConfig& config);

/// One estimator on one simulated dataset.
struct ReplicateRecord {
  std::size_t scenario = 0;  ///< index into config.scenarios
  std::size_t m_index = 0;
  int replicate = 0;
  EstimatorKind estimator = EstimatorKind::Inversion;
  double mse = 0.0;          ///< Frobenius
  bool physical = false;     ///< estimate passes validate_density
  double min_eigenvalue = 0.0;
  double wall_time_s = 0.0;
  std::vector<double> eigenvalues;  ///< non-increasing
};

struct ResultRow {
  std::string scenario;
  std::string estimator;
  int n = 0;
  std::int64_t m = 0;
  double mse_mean = 0.0;
  double mse_std = 0.0;  ///< population standard deviation over replicates
  double wall_time_s = 0.0;
  std::uint64_t seed = 0;
};

/// Every (scenario, m, replicate) cell: fresh true state, one simulated
/// dataset shared by all estimators. Cells run in parallel; the output is
/// in canonical (scenario, m, replicate, estimator) order.
std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& config);

/// Mean and population std per (scenario, estimator, m), on config.mse_scale.
std::vector<ResultRow> aggregate(const ExperimentConfig& config, const std::vector<ReplicateRecord>& records);

std::vector<ResultRow> run_benchmark(const ExperimentConfig& config);

/// results.csv: scenario,estimator,n,m,mse_mean,mse_std,wall_time_s,seed
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);

struct EigenvalueColumn {
  std::string source;  ///< truth, inversion, thresholding, prob, dens
  std::vector<double> eigenvalues;
};

/// Approximate-rank-2 truth (config.mixing_weight) on config.n qubits at
/// m = config.m_values.front(): descending eigenvalues of the truth and of
/// every requested estimator on one dataset.
std::vector<EigenvalueColumn> eigenvalue_report(const ExperimentConfig& config);

/// eigenvalues.csv: source,rank_index,eigenvalue
void write_eigenvalues_csv(std::ostream& os, const std::vector<EigenvalueColumn>& columns);

namespace serial {

std::vector<ReplicateRecord> run_replicates(const ExperimentConfig& config);

}  // namespace serial

}  // namespace qtomo
