#include "qtomo/gibbs.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "qtomo/errors.hpp"

namespace qtomo {

// --- Prior ------------------------------------------------------------------

PriorParams PriorParams::symmetric(Eigen::Index d, double value) {
  if (d < 1) throw DomainError("prior dimension must be positive");
  return PriorParams{std::vector<double>(static_cast<std::size_t>(d), value)};
}

void PriorParams::validate() const {
  if (alpha.empty()) throw DomainError("Dirichlet parameter vector is empty");
  for (double a : alpha)
    if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("Dirichlet parameters must be positive and finite");
}

PriorAssumptionReport check_prior_assumption(const PriorParams& params) {
  params.validate();
  PriorAssumptionReport rep;
  for (double a : params.alpha) {
    rep.sum += a;
    rep.log_product += std::log(a);
    if (a > 1.0) rep.all_at_most_one = false;
  }
  const double d = static_cast<double>(params.alpha.size());
  rep.implied_d2 = d > 1.0 ? -rep.log_product / (d * std::log(d)) : 0.0;
  if (!rep.all_at_most_one) rep.warnings.push_back("some alpha_i exceed 1");
  std::ostringstream os;
  os << "sum of alpha is " << rep.sum << " (treated as D1; rate bounds assume it does not grow with d)";
  rep.warnings.push_back(os.str());
  return rep;
}

Eigen::VectorXd ChainState::gamma() const { return y / y.sum(); }

void ChainState::validate() const {
  if (y.size() < 1 || static_cast<std::size_t>(y.size()) != v.size())
    throw DomainError("chain state needs as many weights as vectors");
  for (Eigen::Index i = 0; i < y.size(); ++i)
    if (!(y(i) > 0.0) || !std::isfinite(y(i))) throw DomainError("chain weights Y_i must be positive and finite");
  for (const auto& vi : v) {
    if (vi.size() != y.size()) throw DimensionError("chain vectors must have dimension d");
    if (std::abs(vi.norm() - 1.0) > 1e-12) throw DomainError("chain vectors must have unit norm");
  }
}

void SamplerConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and non-negative");
  if (iterations < 1) throw DomainError("iterations must be positive");
  if (burn_in < 0) throw DomainError("burn_in must be non-negative");
  if (burn_in >= iterations)
    throw DomainError("burn_in (" + std::to_string(burn_in) + ") must be smaller than iterations (" +
                      std::to_string(iterations) + ")");
  if (thinning < 1) throw DomainError("thinning must be positive");
  if (!(proposal_halfwidth > 0.0)) throw DomainError("proposal half-width must be positive");
  if (resync_every < 1) throw DomainError("resync_every must be positive");
}

Vector sample_sphere(Eigen::Index d, Rng& rng) { return random_unit_vector(d, rng); }

ChainState sample_prior(const PriorParams& params, Rng& rng) {
  params.validate();
  const Eigen::Index d = params.dim();
  ChainState st;
  st.y.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    std::gamma_distribution<double> gamma(params.alpha[i], 1.0);
    double y = 0.0;
    while (!(y > 0.0)) y = gamma(rng);
    st.y(i) = y;
  }
  st.v.reserve(d);
  for (Eigen::Index i = 0; i < d; ++i) st.v.push_back(sample_sphere(d, rng));
  return st;
}

namespace {

Matrix weighted_sum(const ChainState& st) {
  const Eigen::Index d = st.dim();
  Matrix m = Matrix::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) m.noalias() += st.y(i) * (st.v[i] * st.v[i].adjoint());
  return m;
}

double log_prior(const ChainState& st, const PriorParams& params) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < st.dim(); ++i) acc += (params.alpha[i] - 1.0) * std::log(st.y(i)) - st.y(i);
  return acc;
}

}  // namespace

DensityMatrix state_density(const ChainState& state) {
  state.validate();
  Matrix m = weighted_sum(state) / state.y.sum();
  return validate_density(0.5 * (m + m.adjoint()));
}

double log_unnormalized_target(const ChainState& state, double lambda, const LossKind& loss,
                               const PriorParams& params) {
  state.validate();
  params.validate();
  if (params.dim() != state.dim()) throw DimensionError("prior and state dimensions differ");
  const double prior = log_prior(state, params);
  if (lambda == 0.0) return prior;
  const Matrix nu = weighted_sum(state) / state.y.sum();
  return -lambda * loss.evaluate(nu) + prior;
}

// --- Chain --------------------------------------------------------------------

GibbsChain::GibbsChain(const LossKind& loss, double lambda, PriorParams params, ChainState init)
    : loss_kind_(&loss), lambda_(lambda), params_(std::move(params)), state_(std::move(init)) {
  params_.validate();
  state_.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("lambda must be finite and non-negative");
  if (params_.dim() != state_.dim()) throw DimensionError("prior and state dimensions differ");
  n_ = qubits_for_dim(state_.dim());
  if (n_ != loss.qubits()) throw DimensionError("chain dimension does not match the data");
  table_size_ = setting_count(n_) * outcome_count(n_);
  rebuild();
}

void GibbsChain::rebuild() {
  const Eigen::Index d = state_.dim();
  ysum_ = state_.y.sum();
  weighted_ = weighted_sum(state_);
  if (loss_kind_->type() == LossType::Prob) {
    component_.assign(static_cast<std::size_t>(d) * table_size_, 0.0);
    table_sum_.assign(table_size_, 0.0);
    for (Eigen::Index i = 0; i < d; ++i) {
      std::span<double> qi(component_.data() + i * table_size_, table_size_);
      pure_state_probabilities(state_.v[i], qi);
      for (std::size_t k = 0; k < table_size_; ++k) table_sum_[k] += state_.y(i) * qi[k];
    }
    scratch_.assign(table_size_, 0.0);
    proposal_table_.assign(table_size_, 0.0);
    loss_ = prob_loss(table_sum_, ysum_);
  } else {
    loss_ = dens_loss(weighted_, ysum_);
  }
}

double GibbsChain::prob_loss(const std::vector<double>& s, double ysum) const {
  const auto phat = loss_kind_->freqs().values();
  const double inv = 1.0 / ysum;
  double acc = 0.0;
  for (std::size_t k = 0; k < table_size_; ++k) {
    const double diff = s[k] * inv - phat[k];
    acc += diff * diff;
  }
  return acc;
}

double GibbsChain::dens_loss(const Matrix& m, double ysum) const {
  return (m / ysum - loss_kind_->rho_hat()).squaredNorm();
}

double GibbsChain::recompute_loss() const {
  return loss_kind_->evaluate(weighted_sum(state_) / state_.y.sum());
}

double GibbsChain::resync(double tol) {
  const double before = loss_;
  rebuild();
  const double drift = std::abs(before - loss_);
  if (!(drift <= tol))
    throw NumericalError("incremental loss drifted by " + std::to_string(drift) + " from the recomputed value");
  return drift;
}

Matrix GibbsChain::density_matrix() const { return weighted_ / ysum_; }

double GibbsChain::log_accept_y(Eigen::Index i, double log_step) const {
  const double y_old = state_.y(i);
  const double y_new = y_old * std::exp(log_step);
  if (!(y_new > 0.0) || !std::isfinite(y_new)) return -std::numeric_limits<double>::infinity();
  const double delta = y_new - y_old;
  const double ysum_new = ysum_ + delta;
  // Log-space step; recomputed from the values actually used.
  const double dlog = std::log(y_new) - std::log(y_old);
  const double prior_diff = (params_.alpha[i] - 1.0) * dlog - delta;
  const double hastings = dlog;
  if (lambda_ == 0.0) return prior_diff + hastings;

  double new_loss;
  if (loss_kind_->type() == LossType::Prob) {
    const double* qi = component_.data() + i * table_size_;
    for (std::size_t k = 0; k < table_size_; ++k) scratch_[k] = table_sum_[k] + delta * qi[k];
    new_loss = prob_loss(scratch_, ysum_new);
  } else {
    const Vector& v = state_.v[i];
    const Matrix& rho_hat = loss_kind_->rho_hat();
    const double inv = 1.0 / ysum_new;
    const Eigen::Index d = state_.dim();
    double acc = 0.0;
    for (Eigen::Index c = 0; c < d; ++c) {
      const Complex vc = std::conj(v(c));
      for (Eigen::Index r = 0; r < d; ++r) {
        const Complex e = (weighted_(r, c) + delta * v(r) * vc) * inv - rho_hat(r, c);
        acc += std::norm(e);
      }
    }
    new_loss = acc;
  }
  return -lambda_ * (new_loss - loss_) + prior_diff + hastings;
}

bool GibbsChain::apply_y(Eigen::Index i, double log_step, double uniform) {
  const double log_ratio = log_accept_y(i, log_step);
  if (!(std::log(uniform) < log_ratio)) return false;
  const double y_old = state_.y(i);
  const double y_new = y_old * std::exp(log_step);
  const double delta = y_new - y_old;
  state_.y(i) = y_new;
  ysum_ += delta;
  weighted_.noalias() += delta * (state_.v[i] * state_.v[i].adjoint());
  if (loss_kind_->type() == LossType::Prob) {
    const double* qi = component_.data() + i * table_size_;
    for (std::size_t k = 0; k < table_size_; ++k) table_sum_[k] += delta * qi[k];
    loss_ = prob_loss(table_sum_, ysum_);
  } else {
    loss_ = dens_loss(weighted_, ysum_);
  }
  return true;
}

double GibbsChain::log_accept_v(Eigen::Index i, const Vector& proposal) const {
  if (proposal.size() != state_.dim()) throw DimensionError("proposal has the wrong dimension");
  if (lambda_ == 0.0) return 0.0;
  const double yi = state_.y(i);
  double new_loss;
  if (loss_kind_->type() == LossType::Prob) {
    pure_state_probabilities(proposal, proposal_table_);
    const double* qi = component_.data() + i * table_size_;
    for (std::size_t k = 0; k < table_size_; ++k)
      scratch_[k] = table_sum_[k] + yi * (proposal_table_[k] - qi[k]);
    new_loss = prob_loss(scratch_, ysum_);
  } else {
    const Vector& v = state_.v[i];
    const Matrix moved =
        weighted_ + yi * (proposal * proposal.adjoint()) - yi * (v * v.adjoint());
    new_loss = dens_loss(moved, ysum_);
  }
  return -lambda_ * (new_loss - loss_);
}

bool GibbsChain::apply_v(Eigen::Index i, const Vector& proposal, double uniform) {
  const double log_ratio = log_accept_v(i, proposal);
  if (!(std::log(uniform) < log_ratio)) return false;
  const double yi = state_.y(i);
  weighted_.noalias() += yi * (proposal * proposal.adjoint());
  weighted_.noalias() -= yi * (state_.v[i] * state_.v[i].adjoint());
  state_.v[i] = proposal;
  if (loss_kind_->type() == LossType::Prob) {
    double* qi = component_.data() + i * table_size_;
    pure_state_probabilities(proposal, proposal_table_);
    for (std::size_t k = 0; k < table_size_; ++k) {
      table_sum_[k] += yi * (proposal_table_[k] - qi[k]);
      qi[k] = proposal_table_[k];
    }
    loss_ = prob_loss(table_sum_, ysum_);
  } else {
    loss_ = dens_loss(weighted_, ysum_);
  }
  return true;
}

bool GibbsChain::step_y(Eigen::Index i, double halfwidth, Rng& rng) {
  std::uniform_real_distribution<double> step(-halfwidth, halfwidth);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = step(rng);
  const double accept = unit(rng);
  return apply_y(i, u, accept);
}

bool GibbsChain::step_v(Eigen::Index i, Rng& rng) {
  const Vector proposal = sample_sphere(state_.dim(), rng);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double accept = unit(rng);
  return apply_v(i, proposal, accept);
}

std::pair<int, int> GibbsChain::sweep(double halfwidth, Rng& rng) {
  int ay = 0, av = 0;
  for (Eigen::Index i = 0; i < dim(); ++i) ay += step_y(i, halfwidth, rng) ? 1 : 0;
  for (Eigen::Index i = 0; i < dim(); ++i) av += step_v(i, rng) ? 1 : 0;
  return {ay, av};
}

// --- Driver -------------------------------------------------------------------

GibbsOutput run_chain(const LossKind& loss, const SamplerConfig& config, const PriorParams& params) {
  config.validate();
  params.validate();
  const auto d = static_cast<Eigen::Index>(ipow(2, loss.qubits()));
  if (params.dim() != d) throw DimensionError("prior has " + std::to_string(params.dim()) +
                                              " parameters, expected d=" + std::to_string(d));
  Rng rng = make_rng(config.seed);
  GibbsChain chain(loss, config.lambda, params, sample_prior(params, rng));

  Matrix mean = Matrix::Zero(d, d);
  Eigen::VectorXd gamma_sum = Eigen::VectorXd::Zero(d);
  std::int64_t samples = 0;
  std::int64_t accepted_y = 0, accepted_v = 0;
  double max_drift = 0.0;
  std::vector<double> loss_trace;
  loss_trace.reserve(static_cast<std::size_t>(config.iterations));
  std::vector<TraceRow> trace;

  for (std::int64_t t = 1; t <= config.iterations; ++t) {
    const auto [ay, av] = chain.sweep(config.proposal_halfwidth, rng);
    accepted_y += ay;
    accepted_v += av;
    if (t % config.resync_every == 0) max_drift = std::max(max_drift, chain.resync());
    loss_trace.push_back(chain.loss());
    if (t > config.burn_in && (t - config.burn_in) % config.thinning == 0) {
      mean += chain.density_matrix();
      gamma_sum += chain.state().gamma();
      ++samples;
    }
    if (config.record_trace) {
      const Eigen::VectorXd g = chain.state().gamma();
      trace.push_back({t, chain.loss(), std::vector<double>(g.data(), g.data() + g.size()), ay, av});
    }
  }

  mean /= static_cast<double>(samples);
  mean = 0.5 * (mean + mean.adjoint());
  const double proposals = static_cast<double>(config.iterations) * static_cast<double>(d);
  gamma_sum /= static_cast<double>(samples);
  return GibbsOutput{validate_density(mean),
                     static_cast<double>(accepted_y) / proposals,
                     static_cast<double>(accepted_v) / proposals,
                     std::move(loss_trace),
                     std::vector<double>(gamma_sum.data(), gamma_sum.data() + gamma_sum.size()),
                     samples,
                     max_drift,
                     std::move(trace)};
}

void write_chain_trace(std::ostream& os, const GibbsOutput& out) {
  if (out.trace.empty()) throw DomainError("chain trace was not recorded");
  const std::size_t d = out.trace.front().gamma.size();
  os << "iteration,loss";
  for (std::size_t i = 1; i <= d; ++i) os << ",gamma_" << i;
  os << ",accepted_Y,accepted_V\n";
  os.precision(17);
  for (const auto& row : out.trace) {
    os << row.iteration << ',' << row.loss;
    for (double g : row.gamma) os << ',' << g;
    os << ',' << row.accepted_y << ',' << row.accepted_v << '\n';
  }
}

}  // namespace qtomo
