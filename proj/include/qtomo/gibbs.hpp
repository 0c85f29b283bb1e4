#pragma once

// Pseudo-posterior sampling over density matrices
//
//   pi_lambda(d nu)  ∝  exp(-lambda * l(nu, D)) pi(d nu)
//
// with the prior nu = sum_i gamma_i V_i V_i^dagger, gamma ~ Dirichlet(alpha)
// and V_i uniform on the unit sphere of C^d. The Dirichlet weights are
// carried as independent Gamma(alpha_i, 1) variables Y_i with
// gamma_i = Y_i / sum_j Y_j, so each site update touches a single Y_i.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "qtomo/estimators.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

/// Dirichlet parameters of the prior on the mixture weights.
struct PriorParams {
  std::vector<double> alpha;

  /// alpha_i = value for all i = 1..d.
  static PriorParams symmetric(Eigen::Index d, double value);

  Eigen::Index dim() const noexcept { return static_cast<Eigen::Index>(alpha.size()); }
  /// Throws DomainError unless every alpha_i > 0.
  void validate() const;
};

/// Record of the rate-theory conditions on alpha: alpha_i <= 1, sum alpha_i
/// = D1 and prod alpha_i >= exp(-D2 d log d). Only reported, never enforced.
struct PriorAssumptionReport {
  bool all_at_most_one = true;
  double sum = 0.0;            ///< D1
  double log_product = 0.0;    ///< log prod alpha_i
  double implied_d2 = 0.0;     ///< -log prod alpha_i / (d log d)
  std::vector<std::string> warnings;
};

PriorAssumptionReport check_prior_assumption(const PriorParams& params);

/// One point of the chain: Y_i > 0 and unit vectors V_i in C^d.
struct ChainState {
  Eigen::VectorXd y;
  std::vector<Vector> v;

  Eigen::Index dim() const noexcept { return y.size(); }
  /// gamma_i = Y_i / sum Y.
  Eigen::VectorXd gamma() const;
  /// Throws DomainError on Y_i <= 0, a non-unit V_i or mismatched sizes.
  void validate() const;
};

struct SamplerConfig {
  double lambda = 1.0;             ///< inverse temperature, >= 0
  std::int64_t iterations = 10000; ///< sweeps T, burn-in included
  std::int64_t burn_in = 2000;
  std::int64_t thinning = 1;
  std::uint64_t seed = 0;
  double proposal_halfwidth = 0.5; ///< Y proposal: Y * exp(U(-h, h))
  std::int64_t resync_every = 100; ///< sweeps between full loss recomputations
  bool record_trace = false;

  void validate() const;
};

/// Per-sweep chain diagnostics.
struct TraceRow {
  std::int64_t iteration = 0;
  double loss = 0.0;
  std::vector<double> gamma;
  int accepted_y = 0;
  int accepted_v = 0;
};

struct GibbsOutput {
  DensityMatrix estimate;        ///< pseudo-posterior mean
  double accept_rate_y = 0.0;
  double accept_rate_v = 0.0;
  std::vector<double> loss_trace;  ///< loss at the end of every sweep
  std::vector<double> gamma_mean;  ///< over the averaged sweeps
  std::int64_t samples = 0;        ///< sweeps entering the average
  double max_resync_drift = 0.0;
  std::vector<TraceRow> trace;     ///< filled when record_trace is set
};

/// Isotropic unit vector in C^d.
Vector sample_sphere(Eigen::Index d, Rng& rng);

/// Y_i ~ Gamma(alpha_i, 1), V_i ~ uniform on the sphere.
ChainState sample_prior(const PriorParams& params, Rng& rng);

/// sum_i gamma_i V_i V_i^dagger.
DensityMatrix state_density(const ChainState& state);

/// -lambda * l(nu) + sum_i [(alpha_i - 1) log Y_i - Y_i], up to a constant.
double log_unnormalized_target(const ChainState& state, double lambda, const LossKind& loss,
                               const PriorParams& params);

/// A chain positioned at some state, with the loss maintained incrementally:
/// the outcome table (prob) or the unnormalized matrix sum_i Y_i V_i V_i^dagger
/// (dens) is updated by rank-one corrections on every accepted move.
class GibbsChain {
 public:
  GibbsChain(const LossKind& loss, double lambda, PriorParams params, ChainState init);

  /// Single-site update of Y_i: propose Y_i * exp(u), u ~ U(-h, h).
  bool step_y(Eigen::Index i, double halfwidth, Rng& rng);
  /// Single-site update of V_i with an independent draw from the sphere.
  bool step_v(Eigen::Index i, Rng& rng);

  /// Log acceptance ratio for Y_i -> Y_i * exp(log_step), Hastings term included.
  double log_accept_y(Eigen::Index i, double log_step) const;
  /// Accepts iff log(uniform) < log_accept_y; returns whether it did.
  bool apply_y(Eigen::Index i, double log_step, double uniform);

  /// Log acceptance ratio for V_i -> proposal (unit vector).
  double log_accept_v(Eigen::Index i, const Vector& proposal) const;
  bool apply_v(Eigen::Index i, const Vector& proposal, double uniform);

  /// One sweep: Y_1..Y_d then V_1..V_d. Returns accepted counts.
  std::pair<int, int> sweep(double halfwidth, Rng& rng);

  /// Incrementally maintained loss of the current state.
  double loss() const noexcept { return loss_; }
  /// Loss of the current state computed from scratch.
  double recompute_loss() const;
  /// Rebuild all cached quantities from the state; returns the absolute
  /// loss drift that was corrected. Throws NumericalError if above `tol`.
  double resync(double tol = 1e-8);

  double lambda() const noexcept { return lambda_; }
  const ChainState& state() const noexcept { return state_; }
  Eigen::Index dim() const noexcept { return state_.dim(); }

  /// Current nu as a raw matrix (no validation).
  Matrix density_matrix() const;

 private:
  void rebuild();
  double prob_loss(const std::vector<double>& s, double ysum) const;
  double dens_loss(const Matrix& m, double ysum) const;

  const LossKind* loss_kind_;
  double lambda_;
  PriorParams params_;
  ChainState state_;
  int n_;
  std::size_t table_size_;

  double ysum_ = 0.0;
  Matrix weighted_;                 // sum_i Y_i V_i V_i^dagger
  std::vector<double> component_;   // prob: pure-state tables, d x 6^n
  std::vector<double> table_sum_;   // prob: sum_i Y_i q_i
  double loss_ = 0.0;
  mutable std::vector<double> scratch_;
  mutable std::vector<double> proposal_table_;
};

/// Runs the chain from a prior draw and averages nu over the sweeps after
/// burn-in (every `thinning`-th). Deterministic in config.seed.
GibbsOutput run_chain(const LossKind& loss, const SamplerConfig& config, const PriorParams& params);

/// CSV: iteration,loss,gamma_1..gamma_d,accepted_Y,accepted_V
void write_chain_trace(std::ostream& os, const GibbsOutput& out);

}  // namespace qtomo
