#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "qtomo/types.hpp"

namespace qtomo {

/// Tolerances for the density-matrix axioms.
inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kPositiveTol = 1e-9;
inline constexpr double kTraceTol = 1e-10;

/// A d x d complex matrix known to be Hermitian, positive semidefinite
/// and of unit trace (within the tolerances above), with d = 2^n.
///
/// The only way to obtain one is through validate_density(), so holding
/// a DensityMatrix is proof that the axioms were checked.
class DensityMatrix {
 public:
  const Matrix& matrix() const noexcept { return m_; }
  Eigen::Index dim() const noexcept { return m_.rows(); }
  int qubits() const noexcept { return n_; }

  Complex operator()(Eigen::Index r, Eigen::Index c) const { return m_(r, c); }

 private:
  DensityMatrix(Matrix m, int n) : m_(std::move(m)), n_(n) {}
  friend DensityMatrix validate_density(const Matrix& m);

  Matrix m_;
  int n_;
};

/// Checks the three density axioms and wraps `m`.
/// Throws DimensionError for a non-square or non-power-of-two matrix and a
/// ValidationError naming the first failed axiom otherwise.
DensityMatrix validate_density(const Matrix& m);

/// Largest |M - M^dagger| entry.
double hermitian_defect(const Matrix& m);

/// Eigenvalues of a Hermitian matrix in non-increasing order.
std::vector<double> sorted_eigenvalues(const Matrix& m);
inline std::vector<double> sorted_eigenvalues(const DensityMatrix& rho) {
  return sorted_eigenvalues(rho.matrix());
}

/// Squared Frobenius distance ||est - truth||_F^2.
double mse(const Matrix& est, const Matrix& truth);
inline double mse(const DensityMatrix& est, const DensityMatrix& truth) {
  return mse(est.matrix(), truth.matrix());
}

/// Clip eigenvalues <= tau to zero, renormalize the rest to unit sum and
/// rebuild. Clipping and renormalizing repeat until no kept eigenvalue
/// drops to tau or below, which makes the map idempotent. If nothing
/// survives the result is I/d.
DensityMatrix project_to_density(const Matrix& m, double tau = 0.0);

// State families used by the benchmarks. Every generator takes its RNG
// explicitly and consumes it in a fixed order.

/// Isotropic unit vector: complex standard normal draw, normalized.
Vector random_unit_vector(Eigen::Index d, Rng& rng);

DensityMatrix random_pure(Eigen::Index d, Rng& rng);
DensityMatrix rank2_mixture(Eigen::Index d, Rng& rng);
DensityMatrix approx_rank2(Eigen::Index d, double w, Rng& rng);
DensityMatrix maximally_mixed(Eigen::Index d);

/// Pure-state density |psi><psi| for a unit vector psi.
DensityMatrix pure_density(const Vector& psi);

enum class ScenarioKind { Pure, Rank2, ApproxRank2, MaximallyMixed };

struct StateScenario {
  ScenarioKind kind = ScenarioKind::Pure;
  double mixing_weight = 0.98;  ///< approx_rank2 only

  std::string name() const;
  /// Accepts "pure", "rank2", "approx_rank2", "maximally_mixed" (and "mixed").
  static StateScenario parse(std::string_view name);
};

/// Draw a true state for the scenario on n qubits.
DensityMatrix generate_state(const StateScenario& scenario, int n, Rng& rng);

/// Exact eigenvalues of the scenario's family, non-increasing.
std::vector<double> scenario_eigenvalues(const StateScenario& scenario, int n);

// JSON form: {"n": int, "re": [row-major], "im": [row-major], ...metadata}.

nlohmann::json to_json(const Matrix& m);
nlohmann::json to_json(const DensityMatrix& rho);
/// Parses the re/im arrays; does not validate density axioms.
Matrix matrix_from_json(const nlohmann::json& j);

}  // namespace qtomo
