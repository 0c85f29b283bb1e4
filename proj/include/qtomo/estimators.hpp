#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "qtomo/pauli.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

/// Linear inversion: rho_hat = sum_b rho_hat_b sigma_b with
///   rho_hat_b = 1 / (2^n 3^{d(b)}) * sum_{a,s} P_{(s,a),b} p_hat_{a,s}.
/// Hermitian with unit trace, not necessarily positive. Throws DomainError
/// when a setting's row does not sum to one (missing data for it).
Matrix inversion_estimator(const ProbabilityTable& freqs);

/// Pauli coefficients rho_hat_b of the inversion estimate.
std::vector<double> inversion_coefficients(const ProbabilityTable& freqs);

/// ||p_nu - p_hat||^2 summed over every (setting, outcome).
double loss_prob(const DensityMatrix& nu, const ProbabilityTable& freqs);

/// ||nu - rho_hat||_F^2.
double loss_dens(const DensityMatrix& nu, const Matrix& rho_hat);

/// Default eigenvalue threshold 2 * sqrt(log(2d) * d / N).
double default_threshold(int n, std::int64_t m);

/// Inversion estimate projected onto the density matrices with
/// eigenvalues <= tau clipped.
DensityMatrix thresholding_estimator(const ProbabilityTable& freqs, double tau);

enum class LossType { Prob, Dens };

std::string to_string(LossType t);
LossType parse_loss_type(std::string_view s);

/// Pseudo-likelihood loss l(nu, D). The dens variant caches the inversion
/// estimate of the same frequencies; both are immutable once built.
class LossKind {
 public:
  static LossKind prob(ProbabilityTable freqs);
  static LossKind dens(ProbabilityTable freqs);

  LossType type() const noexcept { return type_; }
  int qubits() const noexcept { return freqs_.qubits(); }
  const ProbabilityTable& freqs() const noexcept { return freqs_; }
  /// Inversion estimate; dens only.
  const Matrix& rho_hat() const;

  double operator()(const DensityMatrix& nu) const;
  /// Loss of an arbitrary Hermitian matrix (no density check).
  double evaluate(const Matrix& nu) const;

 private:
  LossKind(LossType type, ProbabilityTable freqs, std::optional<Matrix> rho_hat)
      : type_(type), freqs_(std::move(freqs)), rho_hat_(std::move(rho_hat)) {}

  LossType type_;
  ProbabilityTable freqs_;
  std::optional<Matrix> rho_hat_;
};

enum class LambdaRule {
  HalfM,       ///< m / 2, the prob-estimator choice
  QuarterN,    ///< N / 4, the experimental dens-estimator choice
  DensTheory,  ///< N / (4 * 5^n), the dens-estimator rate choice
};

std::string to_string(LambdaRule r);
/// Accepts "m2", "N4", "theory".
LambdaRule parse_lambda_rule(std::string_view s);

double lambda_for_rule(LambdaRule rule, int n, std::int64_t m);

/// prob -> m/2, dens -> N/4.
double default_lambda(LossType type, int n, std::int64_t m);
LambdaRule default_lambda_rule(LossType type);

namespace serial {

/// Reference inversion: explicit sums of design_entry over all (a, s).
Matrix inversion_estimator(const ProbabilityTable& freqs);

}  // namespace serial

}  // namespace qtomo
