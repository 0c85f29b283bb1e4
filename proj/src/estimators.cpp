#include "qtomo/estimators.hpp"

#include <bit>
#include <cmath>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

namespace {

void check_complete(const ProbabilityTable& freqs) {
  const int n = freqs.qubits();
  for (std::size_t a = 0; a < freqs.settings(); ++a) {
    double sum = 0.0;
    for (double v : freqs.row(a)) sum += v;
    if (std::abs(sum - 1.0) > 1e-9)
      throw DomainError("setting " + Setting::from_index(n, a).str() +
                        " is missing (frequencies sum to " + std::to_string(sum) + ")");
  }
}

}  // namespace

std::vector<double> inversion_coefficients(const ProbabilityTable& freqs) {
  check_complete(freqs);
  const int n = freqs.qubits();
  const std::size_t d = freqs.outcomes();
  std::vector<double> coeffs(basis_count(n));
  const auto count = static_cast<std::int64_t>(coeffs.size());

  QTOMO_OMP_PRAGMA("omp parallel for schedule(dynamic, 4)")
  for (std::int64_t bi = 0; bi < count; ++bi) {
    const auto b = static_cast<std::size_t>(bi);
    // Split b into free (identity) positions and fixed axes.
    std::vector<int> free_pos;
    std::size_t fixed_setting = 0;  // setting digits on non-identity positions
    std::size_t sign_mask = 0;      // outcome bits on non-identity positions
    for (int j = 0; j < n; ++j) {
      const auto letter = (b / ipow(4, n - 1 - j)) % 4;
      if (letter == 0) {
        free_pos.push_back(j);
      } else {
        fixed_setting += (letter - 1) * ipow(3, n - 1 - j);
        sign_mask |= std::size_t{1} << (n - 1 - j);
      }
    }
    const std::size_t combos = ipow(3, static_cast<int>(free_pos.size()));
    double acc = 0.0;
    for (std::size_t k = 0; k < combos; ++k) {
      std::size_t a = fixed_setting;
      std::size_t rest = k;
      for (int fp : free_pos) {
        a += (rest % 3) * ipow(3, n - 1 - fp);
        rest /= 3;
      }
      const auto row = freqs.row(a);
      for (std::size_t s = 0; s < d; ++s)
        acc += (std::popcount(s & sign_mask) % 2 ? -row[s] : row[s]);
    }
    coeffs[b] = acc / (static_cast<double>(d) * static_cast<double>(combos));
  }
  return coeffs;
}

Matrix inversion_estimator(const ProbabilityTable& freqs) {
  return from_pauli_coefficients(inversion_coefficients(freqs), freqs.qubits());
}

double loss_prob(const DensityMatrix& nu, const ProbabilityTable& freqs) {
  if (nu.qubits() != freqs.qubits()) throw DimensionError("state and frequency table have different qubit counts");
  return table_distance2(forward_probabilities(nu), freqs);
}

double loss_dens(const DensityMatrix& nu, const Matrix& rho_hat) {
  if (nu.dim() != rho_hat.rows() || rho_hat.rows() != rho_hat.cols())
    throw DimensionError("state and inversion estimate have different sizes");
  return (nu.matrix() - rho_hat).squaredNorm();
}

double default_threshold(int n, std::int64_t m) {
  const double d = static_cast<double>(ipow(2, n));
  const double big_n = static_cast<double>(m) * static_cast<double>(setting_count(n));
  return 2.0 * std::sqrt(std::log(2.0 * d) * d / big_n);
}

DensityMatrix thresholding_estimator(const ProbabilityTable& freqs, double tau) {
  return project_to_density(inversion_estimator(freqs), tau);
}

std::string to_string(LossType t) { return t == LossType::Prob ? "prob" : "dens"; }

LossType parse_loss_type(std::string_view s) {
  if (s == "prob") return LossType::Prob;
  if (s == "dens") return LossType::Dens;
  throw DomainError("unknown loss '" + std::string(s) + "' (expected prob or dens)");
}

LossKind LossKind::prob(ProbabilityTable freqs) {
  return LossKind(LossType::Prob, std::move(freqs), std::nullopt);
}

LossKind LossKind::dens(ProbabilityTable freqs) {
  Matrix rho_hat = inversion_estimator(freqs);
  return LossKind(LossType::Dens, std::move(freqs), std::move(rho_hat));
}

const Matrix& LossKind::rho_hat() const {
  if (!rho_hat_) throw DomainError("prob loss carries no inversion estimate");
  return *rho_hat_;
}

double LossKind::evaluate(const Matrix& nu) const {
  if (type_ == LossType::Dens) {
    if (nu.rows() != rho_hat_->rows()) throw DimensionError("state and inversion estimate have different sizes");
    return (nu - *rho_hat_).squaredNorm();
  }
  return table_distance2(forward_map(nu), freqs_);
}

double LossKind::operator()(const DensityMatrix& nu) const {
  return type_ == LossType::Dens ? loss_dens(nu, *rho_hat_) : loss_prob(nu, freqs_);
}

std::string to_string(LambdaRule r) {
  switch (r) {
    case LambdaRule::HalfM: return "m2";
    case LambdaRule::QuarterN: return "N4";
    case LambdaRule::DensTheory: return "theory";
  }
  return "?";
}

LambdaRule parse_lambda_rule(std::string_view s) {
  if (s == "m2") return LambdaRule::HalfM;
  if (s == "N4") return LambdaRule::QuarterN;
  if (s == "theory") return LambdaRule::DensTheory;
  throw DomainError("unknown lambda rule '" + std::string(s) + "' (expected m2, N4, theory)");
}

double lambda_for_rule(LambdaRule rule, int n, std::int64_t m) {
  if (m < 1) throw DomainError("m must be positive");
  const double big_n = static_cast<double>(m) * static_cast<double>(setting_count(n));
  switch (rule) {
    case LambdaRule::HalfM: return static_cast<double>(m) / 2.0;
    case LambdaRule::QuarterN: return big_n / 4.0;
    case LambdaRule::DensTheory: return big_n / (4.0 * static_cast<double>(ipow(5, n)));
  }
  throw DomainError("unknown lambda rule");
}

LambdaRule default_lambda_rule(LossType type) {
  return type == LossType::Prob ? LambdaRule::HalfM : LambdaRule::QuarterN;
}

double default_lambda(LossType type, int n, std::int64_t m) {
  return lambda_for_rule(default_lambda_rule(type), n, m);
}

namespace serial {

Matrix inversion_estimator(const ProbabilityTable& freqs) {
  check_complete(freqs);
  const int n = freqs.qubits();
  std::vector<double> coeffs(basis_count(n), 0.0);
  for (std::size_t b = 0; b < coeffs.size(); ++b) {
    const int identities = BasisIndex::from_index(n, b).identity_count();
    double acc = 0.0;
    for (std::size_t a = 0; a < freqs.settings(); ++a)
      for (std::size_t s = 0; s < freqs.outcomes(); ++s) acc += design_entry(n, a, s, b) * freqs.at(a, s);
    coeffs[b] = acc / (static_cast<double>(freqs.outcomes()) * static_cast<double>(ipow(3, identities)));
  }
  return from_pauli_coefficients(coeffs, n);
}

}  // namespace serial

}  // namespace qtomo
