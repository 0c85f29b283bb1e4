#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "qtomo/errors.hpp"
#include "qtomo/gibbs.hpp"
#include "qtomo/measurement.hpp"

using namespace qtomo;

namespace {

LossKind prob_loss_for(const DensityMatrix& rho, std::int64_t m, std::uint64_t seed) {
  return LossKind::prob(empirical_frequencies(simulate_dataset(rho, m, seed)));
}

LossKind dens_loss_for(const DensityMatrix& rho, std::int64_t m, std::uint64_t seed) {
  return LossKind::dens(empirical_frequencies(simulate_dataset(rho, m, seed)));
}

}  // namespace

TEST(PriorParams, ValidationAndAssumptionReport) {
  EXPECT_THROW((PriorParams{{0.5, 0.0}}.validate()), DomainError);
  EXPECT_THROW(PriorParams{{}}.validate(), DomainError);
  const auto report = check_prior_assumption(PriorParams::symmetric(4, 0.5));
  EXPECT_TRUE(report.all_at_most_one);
  EXPECT_DOUBLE_EQ(report.sum, 2.0);
  EXPECT_NEAR(report.log_product, 4 * std::log(0.5), 1e-15);
  EXPECT_NEAR(report.implied_d2, -report.log_product / (4 * std::log(4.0)), 1e-15);
  const auto big = check_prior_assumption(PriorParams{{2.0, 0.5}});
  EXPECT_FALSE(big.all_at_most_one);
  EXPECT_EQ(big.warnings.size(), report.warnings.size() + 1);
}

TEST(SamplerConfig, Validation) {
  SamplerConfig c;
  EXPECT_NO_THROW(c.validate());
  c.burn_in = c.iterations;
  EXPECT_THROW(c.validate(), DomainError);
  c = SamplerConfig{};
  c.lambda = -1;
  EXPECT_THROW(c.validate(), DomainError);
  c = SamplerConfig{};
  c.lambda = 0;
  EXPECT_NO_THROW(c.validate());
  c.thinning = 0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(SampleSphere, UnitNormIsotropicAndSeeded) {
  Rng rng = make_rng(60);
  const Eigen::Index d = 4;
  Matrix mean = Matrix::Zero(d, d);
  const int draws = 10000;
  for (int k = 0; k < draws; ++k) {
    const Vector v = sample_sphere(d, rng);
    ASSERT_NEAR(v.norm(), 1.0, 1e-12);
    mean += v * v.adjoint() / double(draws);
  }
  EXPECT_LT((mean - Matrix::Identity(d, d) / double(d)).cwiseAbs().maxCoeff(), 5e-2);
  Rng a = make_rng(3), b = make_rng(3);
  EXPECT_EQ(sample_sphere(8, a), sample_sphere(8, b));
}

TEST(SamplePrior, GammaMarginalsMatchBeta) {
  Rng rng = make_rng(61);
  const auto params = PriorParams{{0.5, 0.5, 1.0, 0.2}};
  const double total = 2.2;
  std::vector<std::vector<double>> gamma(4);
  for (int k = 0; k < 10000; ++k) {
    const auto st = sample_prior(params, rng);
    const Eigen::VectorXd g = st.gamma();
    ASSERT_TRUE((st.y.array() > 0).all());
    ASSERT_NEAR(g.sum(), 1.0, 1e-15);
    for (int i = 0; i < 4; ++i) gamma[i].push_back(g(i));
  }
  for (int i = 0; i < 4; ++i) {
    const double a = params.alpha[i];
    const double p =
        oracle::ks_one_sample_pvalue(gamma[i], [&](double x) { return oracle::beta_cdf(x, a, total - a); });
    EXPECT_GT(p, 1e-3) << "component " << i;
  }
}

TEST(SamplePrior, AgreesWithDirectDirichletDraws) {
  Rng rng = make_rng(62), ref = make_rng(63);
  const auto params = PriorParams::symmetric(4, 0.5);
  const auto direct = oracle::dirichlet_draws(params.alpha, 5000, ref);
  std::vector<double> ours, theirs;
  for (int k = 0; k < 5000; ++k) ours.push_back(sample_prior(params, rng).gamma()(0));
  for (const auto& g : direct) theirs.push_back(g[0]);
  EXPECT_GT(oracle::ks_two_sample_pvalue(ours, theirs), 1e-3);
}

TEST(StateDensity, Examples) {
  Rng rng = make_rng(64);
  ChainState st;
  st.y = Eigen::VectorXd::Constant(4, 1e-300);
  st.y(2) = 1.0;
  for (int i = 0; i < 4; ++i) st.v.push_back(sample_sphere(4, rng));
  const auto rank1 = state_density(st);
  EXPECT_LT((rank1.matrix() - st.v[2] * st.v[2].adjoint()).norm(), 1e-12);

  st.y = Eigen::VectorXd::Constant(4, 3.0);
  for (int i = 0; i < 4; ++i) st.v[i] = Vector::Unit(4, i);
  EXPECT_LT((state_density(st).matrix() - Matrix::Identity(4, 4) / 4.0).norm(), 1e-15);

  for (int k = 0; k < 20; ++k) EXPECT_NO_THROW(state_density(sample_prior(PriorParams::symmetric(8, 0.5), rng)));

  st.y(0) = -1.0;
  EXPECT_THROW(state_density(st), DomainError);
}

TEST(LogTarget, PriorOnlyLinearityAndMonotonicity) {
  Rng rng = make_rng(65);
  const auto params = PriorParams::symmetric(4, 0.5);
  const auto loss = prob_loss_for(random_pure(4, rng), 100, 1);
  const auto s1 = sample_prior(params, rng), s2 = sample_prior(params, rng);
  double prior = 0.0;
  for (int i = 0; i < 4; ++i) prior += -0.5 * std::log(s1.y(i)) - s1.y(i);
  EXPECT_NEAR(log_unnormalized_target(s1, 0.0, loss, params), prior, 1e-12);

  const auto diff = [&](double lambda) {
    return log_unnormalized_target(s1, lambda, loss, params) - log_unnormalized_target(s2, lambda, loss, params);
  };
  const double base = diff(0.0);
  EXPECT_NEAR(diff(20.0) - base, 2 * (diff(10.0) - base), 1e-9);

  const double l1 = loss(state_density(s1)), l2 = loss(state_density(s2));
  const double p1 = log_unnormalized_target(s1, 0.0, loss, params);
  const double p2 = log_unnormalized_target(s2, 0.0, loss, params);
  // Same prior term, larger loss -> smaller target.
  EXPECT_EQ((log_unnormalized_target(s1, 5.0, loss, params) - p1 < log_unnormalized_target(s2, 5.0, loss, params) - p2),
            l1 > l2);
}

TEST(StepY, AcceptanceMatchesTargetDifferencePlusHastingsTerm) {
  Rng rng = make_rng(66);
  const auto params = PriorParams::symmetric(4, 0.5);
  for (const auto& loss : {prob_loss_for(random_pure(4, rng), 200, 2), dens_loss_for(random_pure(4, rng), 200, 3)}) {
    const auto init = sample_prior(params, rng);
    GibbsChain chain(loss, 37.0, params, init);
    for (Eigen::Index i = 0; i < 4; ++i)
      for (double u : {-0.4, -0.1, 0.2, 0.45}) {
        ChainState moved = init;
        moved.y(i) *= std::exp(u);
        const double expected = log_unnormalized_target(moved, 37.0, loss, params) -
                                log_unnormalized_target(init, 37.0, loss, params) + u;
        EXPECT_NEAR(chain.log_accept_y(i, u), expected, 1e-9);
      }
  }
}

TEST(StepY, ZeroStepIsAlwaysAccepted) {
  Rng rng = make_rng(67);
  const auto params = PriorParams::symmetric(4, 0.5);
  const auto loss = prob_loss_for(random_pure(4, rng), 2000, 4);
  GibbsChain chain(loss, 1000.0, params, sample_prior(params, rng));
  for (Eigen::Index i = 0; i < 4; ++i) {
    EXPECT_NEAR(chain.log_accept_y(i, 0.0), 0.0, 1e-9);
    EXPECT_TRUE(chain.apply_y(i, 0.0, 0.999));
  }
}

TEST(StepY, GlobalRescalingChangesOnlyPriorTerms) {
  Rng rng = make_rng(68);
  const auto params = PriorParams::symmetric(4, 0.5);
  const auto loss = dens_loss_for(oracle::random_density(2, rng), 100, 5);
  const auto st = sample_prior(params, rng);
  for (double c : {0.1, 3.0, 50.0}) {
    ChainState scaled = st;
    scaled.y *= c;
    EXPECT_LT((state_density(scaled).matrix() - state_density(st).matrix()).norm(), 1e-14);
    EXPECT_NEAR(loss(state_density(scaled)), loss(state_density(st)), 1e-14);
    const double expected = 4 * (-0.5) * std::log(c) - (c - 1.0) * st.y.sum();
    EXPECT_NEAR(log_unnormalized_target(scaled, 250.0, loss, params) - log_unnormalized_target(st, 250.0, loss, params),
                expected, 1e-8);
  }
}

TEST(StepV, AcceptanceRules) {
  Rng rng = make_rng(69);
  const auto params = PriorParams::symmetric(4, 0.5);
  const auto loss = prob_loss_for(random_pure(4, rng), 500, 6);

  GibbsChain free_chain(loss, 0.0, params, sample_prior(params, rng));
  for (int k = 0; k < 20; ++k) EXPECT_TRUE(free_chain.step_v(k % 4, rng));

  ChainState st = sample_prior(params, rng);
  st.y(1) = 1e-300;
  GibbsChain tiny(loss, 250.0, params, st);
  for (int k = 0; k < 10; ++k) {
    const Vector p = sample_sphere(4, rng);
    EXPECT_NEAR(tiny.log_accept_v(1, p), 0.0, 1e-10);
  }

  GibbsChain chain(loss, 250.0, params, sample_prior(params, rng));
  int improving = 0;
  for (int k = 0; k < 200; ++k) {
    const Eigen::Index i = k % 4;
    const Vector p = sample_sphere(4, rng);
    ChainState moved = chain.state();
    moved.v[i] = p;
    const double new_loss = loss(state_density(moved));
    const double ratio = chain.log_accept_v(i, p);
    EXPECT_NEAR(ratio, -250.0 * (new_loss - chain.loss()), 1e-8);
    if (new_loss < chain.loss()) {
      ++improving;
      EXPECT_TRUE(chain.apply_v(i, p, 1.0 - 1e-12));
    }
  }
  EXPECT_GT(improving, 0);
}

TEST(Chain, IncrementalLossMatchesRecomputation) {
  Rng rng = make_rng(70);
  const auto params = PriorParams::symmetric(4, 0.5);
  for (const auto& loss : {prob_loss_for(random_pure(4, rng), 2000, 7), dens_loss_for(random_pure(4, rng), 2000, 8)}) {
    GibbsChain chain(loss, 400.0, params, sample_prior(params, rng));
    for (int t = 1; t <= 500; ++t) {
      chain.sweep(0.5, rng);
      for (Eigen::Index i = 0; i < 4; ++i) ASSERT_NEAR(chain.state().v[i].norm(), 1.0, 1e-12);
      ASSERT_TRUE((chain.state().y.array() > 0).all());
      if (t % 100 == 0) {
        EXPECT_NEAR(chain.loss(), chain.recompute_loss(), 1e-8);
        EXPECT_NEAR(chain.recompute_loss(), loss(state_density(chain.state())), 1e-8);
        EXPECT_LE(chain.resync(), 1e-8);
      }
    }
  }
}

TEST(RunChain, SeededReproducibility) {
  Rng rng = make_rng(71);
  const auto loss = prob_loss_for(random_pure(4, rng), 200, 9);
  SamplerConfig cfg;
  cfg.lambda = 100;
  cfg.iterations = 600;
  cfg.burn_in = 100;
  cfg.seed = 5;
  const auto params = PriorParams::symmetric(4, 0.5);
  const auto a = run_chain(loss, cfg, params), b = run_chain(loss, cfg, params);
  EXPECT_EQ(a.estimate.matrix(), b.estimate.matrix());
  EXPECT_EQ(a.loss_trace, b.loss_trace);
  EXPECT_EQ(a.accept_rate_y, b.accept_rate_y);
  EXPECT_EQ(a.samples, 500);
  EXPECT_LE(a.max_resync_drift, 1e-8);
  EXPECT_GE(a.accept_rate_y, 0.0);
  EXPECT_LE(a.accept_rate_v, 1.0);
  cfg.seed = 6;
  EXPECT_NE(run_chain(loss, cfg, params).estimate.matrix(), a.estimate.matrix());
}

TEST(RunChain, ThinningAndErrors) {
  const auto loss = LossKind::prob(forward_probabilities(maximally_mixed(2)));
  SamplerConfig cfg;
  cfg.iterations = 100;
  cfg.burn_in = 10;
  cfg.thinning = 7;
  const auto out = run_chain(loss, cfg, PriorParams::symmetric(2, 0.5));
  EXPECT_EQ(out.samples, 12);
  EXPECT_EQ(out.loss_trace.size(), 100u);
  cfg.burn_in = 100;
  EXPECT_THROW(run_chain(loss, cfg, PriorParams::symmetric(2, 0.5)), DomainError);
  cfg.burn_in = 10;
  EXPECT_THROW(run_chain(loss, cfg, PriorParams::symmetric(4, 0.5)), DimensionError);
}

TEST(RunChain, ZeroLambdaEstimateIsThePriorMean) {
  const auto loss = LossKind::prob(forward_probabilities(maximally_mixed(4)));
  SamplerConfig cfg;
  cfg.lambda = 0;
  cfg.iterations = 20000;
  cfg.burn_in = 2000;
  cfg.seed = 8;
  const auto out = run_chain(loss, cfg, PriorParams::symmetric(4, 0.5));
  EXPECT_EQ(out.accept_rate_v, 1.0);
  EXPECT_LT((out.estimate.matrix() - Matrix::Identity(4, 4) / 4.0).norm(), 5e-2);
}

TEST(Chain, ZeroLambdaDetailedBalanceAgainstDirectDirichlet) {
  // Long chain so that the thinned series carries ~5e3 effective draws per marginal.
  const Eigen::Index d = 4;
  const auto params = PriorParams::symmetric(d, 0.5);
  const auto loss = LossKind::prob(forward_probabilities(maximally_mixed(d)));
  Rng rng = make_rng(80);
  GibbsChain chain(loss, 0.0, params, sample_prior(params, rng));
  const int burn_in = 5000, sweeps = 1200000;
  std::vector<std::vector<double>> series(d);
  Matrix vv = Matrix::Zero(d, d);
  for (int t = 1; t <= burn_in + sweeps; ++t) {
    chain.sweep(0.5, rng);
    if (t <= burn_in) continue;
    const Eigen::VectorXd g = chain.state().gamma();
    for (Eigen::Index i = 0; i < d; ++i) series[i].push_back(g(i));
    if (t % 100 == 0) vv += chain.state().v[0] * chain.state().v[0].adjoint();
  }
  vv /= vv.trace().real();
  EXPECT_LT((vv - Matrix::Identity(d, d) / double(d)).cwiseAbs().maxCoeff(), 5e-2);

  Rng ref = make_rng(81);
  const auto direct = oracle::dirichlet_draws(params.alpha, 5000, ref);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double tau = oracle::autocorrelation_time(series[i]);
    const auto step = static_cast<std::size_t>(std::ceil(tau));
    std::vector<double> thinned, reference;
    for (std::size_t t = 0; t < series[i].size(); t += step) thinned.push_back(series[i][t]);
    for (const auto& g : direct) reference.push_back(g[i]);
    EXPECT_GE(thinned.size(), 4000u) << "tau " << tau;
    EXPECT_GT(oracle::ks_two_sample_pvalue(thinned, reference), 1e-3) << "component " << i;
  }
}

TEST(RunChain, LargeLambdaDensConcentratesOnPhysicalInversion) {
  Rng rng = make_rng(72);
  const auto rho = oracle::random_density(1, rng);
  const auto loss = LossKind::dens(forward_probabilities(rho));  // rho_hat = rho, PSD
  const auto params = PriorParams::symmetric(2, 0.5);
  SamplerConfig cfg;
  cfg.iterations = 4000;
  cfg.burn_in = 1000;
  cfg.seed = 9;
  cfg.lambda = 0.0;
  const double baseline = loss(run_chain(loss, cfg, params).estimate);
  cfg.lambda = 1e6;
  const double concentrated = loss(run_chain(loss, cfg, params).estimate);
  EXPECT_LT(concentrated, baseline / 10.0);
}

TEST(RunChain, ProbEstimatorErrorDecadeForPureTwoQubitState) {
  // Mean over 10 replicates of the per-entry squared error.
  double mean = 0.0;
  for (std::uint64_t r = 0; r < 10; ++r) {
    Rng rng = make_rng(73, {r});
    const auto rho = random_pure(4, rng);
    const auto loss = prob_loss_for(rho, 2000, 100 + r);
    SamplerConfig cfg;
    cfg.lambda = 1000;
    cfg.seed = 200 + r;
    const auto out = run_chain(loss, cfg, PriorParams::symmetric(4, 0.5));
    mean += mse(out.estimate, rho) / 16.0 / 10.0;
  }
  EXPECT_GE(mean, 1e-4);
  EXPECT_LT(mean, 1e-3);
}

TEST(ChainTrace, CsvColumns) {
  const auto loss = LossKind::dens(forward_probabilities(maximally_mixed(4)));
  SamplerConfig cfg;
  cfg.iterations = 5;
  cfg.burn_in = 1;
  cfg.record_trace = true;
  const auto out = run_chain(loss, cfg, PriorParams::symmetric(4, 0.5));
  std::ostringstream os;
  write_chain_trace(os, out);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "iteration,loss,gamma_1,gamma_2,gamma_3,gamma_4,accepted_Y,accepted_V");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 5);
  cfg.record_trace = false;
  EXPECT_THROW(write_chain_trace(os, run_chain(loss, cfg, PriorParams::symmetric(4, 0.5))), DomainError);
}
