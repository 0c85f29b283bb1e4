#include "qtomo/states.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qtomo/errors.hpp"

namespace qtomo {

namespace {

Eigen::SelfAdjointEigenSolver<Matrix> eigensolve(const Matrix& m, bool vectors) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(m, vectors ? Eigen::ComputeEigenvectors
                                                          : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("Hermitian eigensolver did not converge");
  return solver;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

}  // namespace

double hermitian_defect(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix validate_density(const Matrix& m) {
  if (m.rows() != m.cols())
    throw DimensionError("matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                         ", not square");
  const int n = qubits_for_dim(m.rows());
  const double defect = hermitian_defect(m);
  if (!(defect <= kHermitianTol))
    throw ValidationError(ValidationError::Axiom::Hermitian,
                          "not Hermitian: max |M - M^dagger| = " + fmt(defect));
  const double tr = m.trace().real();
  // Eigen only reads the lower triangle, so symmetrize first.
  const Matrix herm = 0.5 * (m + m.adjoint());
  const double min_eig = eigensolve(herm, false).eigenvalues().minCoeff();
  if (!(min_eig >= -kPositiveTol))
    throw ValidationError(ValidationError::Axiom::Positive,
                          "not positive semidefinite: smallest eigenvalue " + fmt(min_eig));
  if (!(std::abs(tr - 1.0) <= kTraceTol))
    throw ValidationError(ValidationError::Axiom::Trace, "trace is " + fmt(tr) + ", expected 1");
  return DensityMatrix(m, n);
}

std::vector<double> sorted_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  const Matrix herm = 0.5 * (m + m.adjoint());
  const auto ev = eigensolve(herm, false).eigenvalues();
  std::vector<double> out(ev.data(), ev.data() + ev.size());
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

double mse(const Matrix& est, const Matrix& truth) {
  if (est.rows() != truth.rows() || est.cols() != truth.cols())
    throw DimensionError("mse operands have different shapes");
  return (est - truth).squaredNorm();
}

DensityMatrix project_to_density(const Matrix& m, double tau) {
  if (tau < 0.0) throw DomainError("threshold must be non-negative");
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  const double defect = hermitian_defect(m);
  if (!(defect <= kHermitianTol))
    throw ValidationError(ValidationError::Axiom::Hermitian,
                          "cannot project a non-Hermitian matrix (defect " + fmt(defect) + ")");
  const Eigen::Index d = m.rows();
  const auto solver = eigensolve(0.5 * (m + m.adjoint()), true);
  Eigen::VectorXd ev = solver.eigenvalues();
  for (;;) {
    bool changed = false;
    double total = 0.0;
    for (Eigen::Index i = 0; i < d; ++i) {
      if (ev(i) != 0.0 && ev(i) <= tau) {
        ev(i) = 0.0;
        changed = true;
      }
      total += ev(i);
    }
    if (total <= 0.0) return maximally_mixed(d);
    if (!changed && std::abs(total - 1.0) <= 1e-15) break;
    ev /= total;
    if (!changed) break;
  }
  const Matrix& u = solver.eigenvectors();
  Matrix out = u * ev.cast<Complex>().asDiagonal() * u.adjoint();
  out = 0.5 * (out + out.adjoint());
  return validate_density(out);
}

Vector random_unit_vector(Eigen::Index d, Rng& rng) {
  if (d < 1) throw DomainError("vector dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(d);
  for (;;) {
    for (Eigen::Index i = 0; i < d; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      v(i) = Complex(re, im);
    }
    const double norm = v.norm();
    if (norm > 1e-300) return v / norm;
  }
}

DensityMatrix pure_density(const Vector& psi) {
  return validate_density(psi * psi.adjoint());
}

DensityMatrix random_pure(Eigen::Index d, Rng& rng) {
  if (d < 2) throw DomainError("dimension must be at least 2");
  return pure_density(random_unit_vector(d, rng));
}

namespace {

Matrix rank2_matrix(Eigen::Index d, Rng& rng) {
  if (d < 2) throw DomainError("dimension must be at least 2");
  const Vector psi1 = random_unit_vector(d, rng);
  for (;;) {
    Vector psi2 = random_unit_vector(d, rng);
    const Complex overlap = psi1.dot(psi2);  // <psi1|psi2>
    if (std::abs(overlap) > 1.0 - 1e-12) continue;
    psi2 -= overlap * psi1;
    psi2.normalize();
    return 0.5 * psi1 * psi1.adjoint() + 0.5 * psi2 * psi2.adjoint();
  }
}

}  // namespace

DensityMatrix rank2_mixture(Eigen::Index d, Rng& rng) { return validate_density(rank2_matrix(d, rng)); }

DensityMatrix approx_rank2(Eigen::Index d, double w, Rng& rng) {
  if (!(w >= 0.0 && w <= 1.0)) throw DomainError("mixing weight must lie in [0, 1]");
  const Matrix r2 = rank2_matrix(d, rng);
  if (w == 1.0) return validate_density(r2);
  return validate_density(w * r2 + ((1.0 - w) / static_cast<double>(d)) * Matrix::Identity(d, d));
}

DensityMatrix maximally_mixed(Eigen::Index d) {
  if (d < 2) throw DomainError("dimension must be at least 2");
  return validate_density(Matrix::Identity(d, d) / static_cast<double>(d));
}

std::string StateScenario::name() const {
  switch (kind) {
    case ScenarioKind::Pure: return "pure";
    case ScenarioKind::Rank2: return "rank2";
    case ScenarioKind::ApproxRank2: return "approx_rank2";
    case ScenarioKind::MaximallyMixed: return "maximally_mixed";
  }
  return "unknown";
}

StateScenario StateScenario::parse(std::string_view name) {
  StateScenario sc;
  if (name == "pure") sc.kind = ScenarioKind::Pure;
  else if (name == "rank2") sc.kind = ScenarioKind::Rank2;
  else if (name == "approx_rank2") sc.kind = ScenarioKind::ApproxRank2;
  else if (name == "maximally_mixed" || name == "mixed") sc.kind = ScenarioKind::MaximallyMixed;
  else
    throw DomainError("unknown state scenario '" + std::string(name) +
                      "' (expected pure, rank2, approx_rank2, maximally_mixed)");
  return sc;
}

DensityMatrix generate_state(const StateScenario& scenario, int n, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(ipow(2, n));
  switch (scenario.kind) {
    case ScenarioKind::Pure: return random_pure(d, rng);
    case ScenarioKind::Rank2: return rank2_mixture(d, rng);
    case ScenarioKind::ApproxRank2: return approx_rank2(d, scenario.mixing_weight, rng);
    case ScenarioKind::MaximallyMixed: return maximally_mixed(d);
  }
  throw DomainError("unknown scenario");
}

std::vector<double> scenario_eigenvalues(const StateScenario& scenario, int n) {
  const auto d = ipow(2, n);
  std::vector<double> ev(d, 0.0);
  switch (scenario.kind) {
    case ScenarioKind::Pure:
      ev[0] = 1.0;
      break;
    case ScenarioKind::Rank2:
      ev[0] = ev[1] = 0.5;
      break;
    case ScenarioKind::ApproxRank2: {
      const double w = scenario.mixing_weight;
      for (auto& v : ev) v = (1.0 - w) / static_cast<double>(d);
      ev[0] += w / 2;
      ev[1] += w / 2;
      break;
    }
    case ScenarioKind::MaximallyMixed:
      for (auto& v : ev) v = 1.0 / static_cast<double>(d);
      break;
  }
  return ev;
}

nlohmann::json to_json(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  std::vector<double> re, im;
  re.reserve(m.size());
  im.reserve(m.size());
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      re.push_back(m(r, c).real());
      im.push_back(m(r, c).imag());
    }
  return {{"n", qubits_for_dim(m.rows())}, {"re", re}, {"im", im}};
}

nlohmann::json to_json(const DensityMatrix& rho) { return to_json(rho.matrix()); }

Matrix matrix_from_json(const nlohmann::json& j) {
  try {
    const int n = j.at("n").get<int>();
    if (n < 1 || n > 10) throw ParseError(0, "density JSON: n out of range");
    const auto re = j.at("re").get<std::vector<double>>();
    const auto im = j.at("im").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(ipow(2, n));
    if (re.size() != static_cast<std::size_t>(d * d) || im.size() != re.size())
      throw ParseError(0, "density JSON: expected " + std::to_string(d * d) + " entries in re and im");
    Matrix m(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
      for (Eigen::Index c = 0; c < d; ++c) m(r, c) = Complex(re[r * d + c], im[r * d + c]);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("density JSON: ") + e.what());
  }
}

}  // namespace qtomo
