#pragma once

// Pauli algebra for n qubits: measurement settings and outcomes, their
// projectors, the Born-rule forward map and the Pauli-basis expansion.
//
// Enumeration order is fixed everywhere: qubit 1 is the most significant
// digit; settings count x < y < z, outcomes + < -, basis letters
// i < x < y < z. Outcome index bits therefore coincide with the
// computational basis (|0> is the +1 eigenvector of sigma_z).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qtomo/states.hpp"
#include "qtomo/types.hpp"

namespace qtomo {

enum class Axis : std::uint8_t { X = 0, Y = 1, Z = 2 };
enum class PauliLetter : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

/// Measurement setting a in {x,y,z}^n.
class Setting {
 public:
  Setting() = default;
  explicit Setting(std::vector<Axis> axes) : axes_(std::move(axes)) {}

  static Setting from_index(int n, std::size_t index);
  /// Lowercase string over {x,y,z}, e.g. "xzy".
  static Setting parse(std::string_view s);

  int qubits() const noexcept { return static_cast<int>(axes_.size()); }
  Axis operator[](int j) const { return axes_[j]; }
  const std::vector<Axis>& axes() const noexcept { return axes_; }
  std::size_t index() const;
  std::string str() const;

  friend bool operator==(const Setting&, const Setting&) = default;

 private:
  std::vector<Axis> axes_;
};

/// Measurement outcome s in {+1,-1}^n.
class Outcome {
 public:
  Outcome() = default;
  explicit Outcome(std::vector<int> signs);

  static Outcome from_index(int n, std::size_t index);
  /// String over {+,-}, e.g. "+-+".
  static Outcome parse(std::string_view s);

  int qubits() const noexcept { return static_cast<int>(signs_.size()); }
  int operator[](int j) const { return signs_[j]; }
  std::size_t index() const;
  std::string str() const;

  friend bool operator==(const Outcome&, const Outcome&) = default;

 private:
  std::vector<int> signs_;
};

/// Pauli-basis label b in {I,X,Y,Z}^n.
class BasisIndex {
 public:
  BasisIndex() = default;
  explicit BasisIndex(std::vector<PauliLetter> letters) : letters_(std::move(letters)) {}

  static BasisIndex from_index(int n, std::size_t index);
  /// String over {i,x,y,z}.
  static BasisIndex parse(std::string_view s);

  int qubits() const noexcept { return static_cast<int>(letters_.size()); }
  PauliLetter operator[](int j) const { return letters_[j]; }
  std::size_t index() const;
  std::string str() const;

  /// Positions j (0-based) holding the identity letter.
  std::vector<int> identity_positions() const;
  /// d(b): number of identity letters.
  int identity_count() const;

  friend bool operator==(const BasisIndex&, const BasisIndex&) = default;

 private:
  std::vector<PauliLetter> letters_;
};

inline std::size_t setting_count(int n) { return ipow(3, n); }
inline std::size_t outcome_count(int n) { return ipow(2, n); }
inline std::size_t basis_count(int n) { return ipow(4, n); }

/// Outcome probabilities or empirical frequencies for every
/// (setting, outcome) pair; 6^n values stored setting-major.
class ProbabilityTable {
 public:
  explicit ProbabilityTable(int n);
  ProbabilityTable(int n, std::vector<double> values);

  int qubits() const noexcept { return n_; }
  std::size_t settings() const noexcept { return settings_; }
  std::size_t outcomes() const noexcept { return outcomes_; }
  std::size_t size() const noexcept { return values_.size(); }

  double& at(std::size_t setting, std::size_t outcome) {
    return values_[setting * outcomes_ + outcome];
  }
  double at(std::size_t setting, std::size_t outcome) const {
    return values_[setting * outcomes_ + outcome];
  }
  double at(const Setting& a, const Outcome& s) const;

  std::span<double> row(std::size_t setting) {
    return {values_.data() + setting * outcomes_, outcomes_};
  }
  std::span<const double> row(std::size_t setting) const {
    return {values_.data() + setting * outcomes_, outcomes_};
  }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }

  /// Largest |sum_s p(a,s) - 1| over settings.
  double max_normalization_defect() const;

 private:
  int n_;
  std::size_t settings_;
  std::size_t outcomes_;
  std::vector<double> values_;
};

/// Squared Euclidean distance between two tables of equal shape.
double table_distance2(const ProbabilityTable& p, const ProbabilityTable& q);

/// 2x2 projector onto the `sign` eigenspace of sigma_axis.
Matrix single_qubit_projector(Axis axis, int sign);

/// P_s^a = P_{s1}^{a1} (x) ... (x) P_{sn}^{an}.
Matrix setting_projector(const Setting& a, const Outcome& s);

/// Dense sigma_b.
Matrix pauli_matrix(const BasisIndex& b);

/// Kronecker product with `a` as the more significant factor.
Matrix kron(const Matrix& a, const Matrix& b);

/// Trace(rho P_s^a) for all 2^n outcomes of setting a.
std::vector<double> born_distribution(const DensityMatrix& rho, const Setting& a);

/// Full table p_rho = P rho (OpenMP over settings).
ProbabilityTable forward_probabilities(const DensityMatrix& rho);
/// Same linear map applied to any Hermitian matrix of size 2^n.
ProbabilityTable forward_map(const Matrix& h);

/// Outcome table of the pure state |v><v| (v need not be normalized; the
/// table then scales with |v|^2). Sequential; cost ~ 1.5 * 3^n * 2^n.
void pure_state_probabilities(const Vector& v, std::span<double> out);

/// rho_b = Trace(rho sigma_b) / 2^n.
double pauli_coefficient(const Matrix& rho, const BasisIndex& b);
/// All 4^n coefficients in basis-index order.
std::vector<double> pauli_coefficients(const Matrix& rho);
/// sum_b c_b sigma_b.
Matrix from_pauli_coefficients(std::span<const double> coeffs, int n);

/// Entry P_{(s,a),b} of the design matrix: 0 unless a_j = b_j on every
/// non-identity position of b, otherwise the product of s_j there.
int design_entry(const Setting& a, const Outcome& s, const BasisIndex& b);
int design_entry(int n, std::size_t setting, std::size_t outcome, std::size_t basis);

/// Extreme eigenvalues of P^T P, where P maps Pauli coefficients (rho_b)
/// to the outcome table. Materializes the 4^n x 4^n Gram matrix; n <= 4.
std::pair<double, double> gram_extreme_eigenvalues(int n);

namespace serial {

/// Reference forward map: Trace(h P_s^a) with explicit dense projectors.
ProbabilityTable forward_map(const Matrix& h);

}  // namespace serial

}  // namespace qtomo
