#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "qtomo/errors.hpp"
#include "qtomo/harness.hpp"

using namespace qtomo;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream is(text);
  return parse_config(is);
}

std::size_t error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no error for: " << text;
  return 999;
}

ExperimentConfig small_config() {
  return parse(
      "n = 2\n"
      "m_values = 20, 200\n"
      "scenarios = pure, rank2\n"
      "replications = 3\n"
      "iterations = 300\n"
      "burn_in = 100\n"
      "seed = 17\n");
}

std::string csv(const std::vector<ResultRow>& rows) {
  std::ostringstream os;
  write_results_csv(os, rows);
  return os.str();
}

}  // namespace

TEST(Config, DefaultsMatchTheExperimentalGrid) {
  const ExperimentConfig c;
  EXPECT_EQ(c.n, 2);
  EXPECT_EQ(c.m_values, (std::vector<std::int64_t>{20, 200, 1000, 2000}));
  EXPECT_EQ(c.scenarios.size(), 4u);
  EXPECT_EQ(c.estimators.size(), 4u);
  EXPECT_EQ(c.replications, 10);
  EXPECT_EQ(c.iterations, 10000);
  EXPECT_EQ(c.burn_in, 2000);
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.proposal_halfwidth, 0.5);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ParsesEveryKey) {
  const auto c = parse(
      "# comment line\n"
      "n = 3   # trailing comment\n"
      "m_values = 5,50\n"
      "scenarios = approx_rank2, maximally_mixed\n"
      "estimators = prob, dens\n"
      "replications = 2\n"
      "seed = 99\n"
      "iterations = 500\n"
      "burn_in = 50\n"
      "thinning = 2\n"
      "alpha = 0.3\n"
      "proposal_halfwidth = 0.25\n"
      "lambda_prob = 12.5\n"
      "lambda_dens = theory\n"
      "tau = 0.05\n"
      "mixing_weight = 0.9\n"
      "fixed_state = true\n"
      "mse_scale = entrywise\n"
      "record_timing = false\n"
      "threads = 2\n");
  EXPECT_EQ(c.n, 3);
  EXPECT_EQ(c.m_values, (std::vector<std::int64_t>{5, 50}));
  ASSERT_EQ(c.scenarios.size(), 2u);
  EXPECT_EQ(c.scenarios[0].kind, ScenarioKind::ApproxRank2);
  EXPECT_EQ(c.scenarios[0].mixing_weight, 0.9);
  EXPECT_EQ(c.estimators, (std::vector<EstimatorKind>{EstimatorKind::Prob, EstimatorKind::Dens}));
  EXPECT_EQ(c.seed, 99u);
  EXPECT_EQ(c.thinning, 2);
  EXPECT_EQ(c.alpha, 0.3);
  EXPECT_EQ(c.lambda_prob.resolve(3, 50), 12.5);
  EXPECT_EQ(c.lambda_dens.resolve(3, 50), 50.0 * 27 / (4 * 125));
  EXPECT_EQ(*c.tau, 0.05);
  EXPECT_TRUE(c.fixed_state);
  EXPECT_EQ(c.mse_scale, MseScale::Entrywise);
  EXPECT_EQ(c.threads, 2);
}

TEST(Config, ErrorsNameTheLine) {
  EXPECT_EQ(error_line("n = 2\nbogus = 1\n"), 2u);
  EXPECT_EQ(error_line("n = 2\n\nreplications\n"), 3u);
  EXPECT_EQ(error_line("replications = ten\n"), 1u);
  EXPECT_EQ(error_line("scenarios = pure, wavy\n"), 1u);
  EXPECT_EQ(error_line("lambda_prob = -3\n"), 1u);
  EXPECT_EQ(error_line("seed =\n"), 1u);
  EXPECT_EQ(error_line("replications = 0\n"), 0u);
  EXPECT_EQ(error_line("iterations = 100\nburn_in = 100\n"), 0u);
  EXPECT_THROW(load_config("/nonexistent/qtomo.cfg"), Error);
}

TEST(Config, SeedEnvironmentOverride) {
  auto c = small_config();
  ::setenv("QTOMO_SEED", "4242", 1);
  apply_env_overrides(c);
  EXPECT_EQ(c.seed, 4242u);
  ::setenv("QTOMO_SEED", "x1", 1);
  EXPECT_THROW(apply_env_overrides(c), ParseError);
  ::unsetenv("QTOMO_SEED");
  apply_env_overrides(c);
  EXPECT_EQ(c.seed, 4242u);
}

TEST(Names, RoundTrip) {
  for (auto k : {EstimatorKind::Inversion, EstimatorKind::Thresholding, EstimatorKind::Prob, EstimatorKind::Dens})
    EXPECT_EQ(parse_estimator(to_string(k)), k);
  for (auto s : {MseScale::Frobenius, MseScale::Entrywise}) EXPECT_EQ(parse_mse_scale(to_string(s)), s);
  EXPECT_THROW(parse_estimator("mle"), DomainError);
  EXPECT_EQ(LambdaChoice::parse("N4").rule, LambdaRule::QuarterN);
  EXPECT_EQ(LambdaChoice::parse("7").str(), "7");
}

TEST(Replicates, CanonicalOrderPairedDataAndPhysicality) {
  const auto config = small_config();
  const auto records = run_replicates(config);
  ASSERT_EQ(records.size(), 2u * 2 * 3 * 4);
  std::size_t i = 0;
  for (std::size_t s = 0; s < 2; ++s)
    for (std::size_t k = 0; k < 2; ++k)
      for (int r = 0; r < 3; ++r)
        for (std::size_t e = 0; e < 4; ++e, ++i) {
          EXPECT_EQ(records[i].scenario, s);
          EXPECT_EQ(records[i].m_index, k);
          EXPECT_EQ(records[i].replicate, r);
          EXPECT_EQ(records[i].estimator, config.estimators[e]);
          EXPECT_GE(records[i].mse, 0.0);
          if (records[i].estimator != EstimatorKind::Inversion) {
            EXPECT_TRUE(records[i].physical);
            EXPECT_GE(records[i].min_eigenvalue, -1e-9);
          }
          double sum = 0.0;
          for (double ev : records[i].eigenvalues) sum += ev;
          EXPECT_NEAR(sum, 1.0, 1e-9);
        }
}

TEST(Replicates, ParallelMatchesSerialReference) {
  const auto config = small_config();
  const auto par = run_replicates(config);
  const auto ser = serial::run_replicates(config);
  ASSERT_EQ(par.size(), ser.size());
  for (std::size_t i = 0; i < par.size(); ++i) {
    EXPECT_EQ(par[i].mse, ser[i].mse) << i;
    EXPECT_EQ(par[i].eigenvalues, ser[i].eigenvalues) << i;
  }
}

TEST(Aggregate, MeanAndPopulationStd) {
  ExperimentConfig config = small_config();
  config.scenarios = {StateScenario{ScenarioKind::Pure}};
  config.m_values = {20};
  config.estimators = {EstimatorKind::Inversion};
  config.replications = 3;
  std::vector<ReplicateRecord> records(3);
  const double values[] = {1.0, 2.0, 4.0};
  for (int r = 0; r < 3; ++r) {
    records[r].replicate = r;
    records[r].mse = values[r];
  }
  auto rows = aggregate(config, records);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_NEAR(rows[0].mse_mean, 7.0 / 3.0, 1e-15);
  const double var = ((1 - 7.0 / 3) * (1 - 7.0 / 3) + (2 - 7.0 / 3) * (2 - 7.0 / 3) + (4 - 7.0 / 3) * (4 - 7.0 / 3)) / 3;
  EXPECT_NEAR(rows[0].mse_std, std::sqrt(var), 1e-15);
  EXPECT_EQ(rows[0].scenario, "pure");
  EXPECT_EQ(rows[0].estimator, "inversion");
  EXPECT_EQ(rows[0].m, 20);
  config.mse_scale = MseScale::Entrywise;
  rows = aggregate(config, records);
  EXPECT_NEAR(rows[0].mse_mean, 7.0 / 3.0 / 16.0, 1e-15);
}

TEST(Benchmark, CsvIsReproducible) {
  const auto config = small_config();
  const auto rows = run_benchmark(config);
  ASSERT_EQ(rows.size(), 2u * 2 * 4);
  for (const auto& r : rows) {
    EXPECT_GE(r.mse_mean, 0.0);
    EXPECT_GE(r.mse_std, 0.0);
    EXPECT_EQ(r.seed, 17u);
  }
  const auto text = csv(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), "scenario,estimator,n,m,mse_mean,mse_std,wall_time_s,seed");
  EXPECT_EQ(csv(run_benchmark(config)), text);
}

TEST(Benchmark, PureInversionErrorDecreasesWithSampleSize) {
  auto config = small_config();
  config.scenarios = {StateScenario{ScenarioKind::Pure}};
  config.estimators = {EstimatorKind::Inversion};
  config.m_values = {20, 200, 1000, 2000};
  config.replications = 10;
  const auto rows = run_benchmark(config);
  for (std::size_t k = 1; k < rows.size(); ++k) EXPECT_LT(rows[k].mse_mean, rows[k - 1].mse_mean);
}

TEST(EigenvalueReport, TruthColumnAndSums) {
  ExperimentConfig config;
  config.n = 3;
  config.m_values = {200};
  config.iterations = 400;
  config.burn_in = 100;
  config.estimators = {EstimatorKind::Inversion, EstimatorKind::Prob, EstimatorKind::Dens};
  const auto columns = eigenvalue_report(config);
  ASSERT_EQ(columns.size(), 4u);
  EXPECT_EQ(columns[0].source, "truth");
  const auto truth = scenario_eigenvalues(StateScenario{ScenarioKind::ApproxRank2, 0.98}, 3);
  for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(columns[0].eigenvalues[i], truth[i], 1e-15);
  EXPECT_NEAR(columns[0].eigenvalues[0], 0.4925, 1e-15);
  for (const auto& col : columns) {
    double sum = 0.0;
    for (double v : col.eigenvalues) sum += v;
    EXPECT_NEAR(sum, 1.0, 1e-9) << col.source;
    EXPECT_TRUE(std::is_sorted(col.eigenvalues.rbegin(), col.eigenvalues.rend())) << col.source;
    if (col.source == "prob" || col.source == "dens")
      for (double v : col.eigenvalues) EXPECT_GE(v, -1e-9);
  }
  std::ostringstream os;
  write_eigenvalues_csv(os, columns);
  EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "source,rank_index,eigenvalue");
}
