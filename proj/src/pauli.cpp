#include "qtomo/pauli.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "qtomo/errors.hpp"
#include "qtomo/parallel.hpp"

namespace qtomo {

namespace {

constexpr Complex kI{0.0, 1.0};

void check_qubits(int n) {
  if (n < 1) throw DomainError("qubit count must be at least 1, got " + std::to_string(n));
  if (n > 10) throw ResourceError("qubit count " + std::to_string(n) + " is too large");
}

// Digit j (qubit j, 0-based, qubit 0 most significant) of `index` in `base`.
std::size_t digit(std::size_t index, std::size_t base, int n, int j) {
  return (index / ipow(base, n - 1 - j)) % base;
}

// Basis change whose rows are <e_+| and <e_-| for the given axis.
struct Rotation {
  Complex u00, u01, u10, u11;
};

Rotation rotation_for(Axis axis) {
  const double h = 1.0 / std::sqrt(2.0);
  switch (axis) {
    case Axis::X:
      return {h, h, h, -h};
    case Axis::Y:
      return {h, -kI * h, h, kI * h};
    case Axis::Z:
      break;
  }
  return {1.0, 0.0, 0.0, 1.0};
}

// Apply `u` on qubit j of an n-qubit amplitude vector stored contiguously.
void apply_to_vector(const Rotation& u, int n, int j, Complex* v, std::size_t d) {
  const std::size_t mask = std::size_t{1} << (n - 1 - j);
  for (std::size_t i0 = 0; i0 < d; ++i0) {
    if (i0 & mask) continue;
    const std::size_t i1 = i0 | mask;
    const Complex a = v[i0];
    const Complex b = v[i1];
    v[i0] = u.u00 * a + u.u01 * b;
    v[i1] = u.u10 * a + u.u11 * b;
  }
}

// h <- U h U^dagger with U acting on qubit j.
void apply_to_matrix(const Rotation& u, int n, int j, Matrix& h) {
  const auto d = static_cast<std::size_t>(h.rows());
  for (Eigen::Index c = 0; c < h.cols(); ++c) apply_to_vector(u, n, j, h.col(c).data(), d);
  const Rotation uc{std::conj(u.u00), std::conj(u.u01), std::conj(u.u10), std::conj(u.u11)};
  // Right multiplication by U^dagger acts on row vectors with conj(U).
  const std::size_t mask = std::size_t{1} << (n - 1 - j);
  for (std::size_t c0 = 0; c0 < d; ++c0) {
    if (c0 & mask) continue;
    const std::size_t c1 = c0 | mask;
    for (std::size_t r = 0; r < d; ++r) {
      const Complex a = h(r, c0);
      const Complex b = h(r, c1);
      h(r, c0) = uc.u00 * a + uc.u01 * b;
      h(r, c1) = uc.u10 * a + uc.u11 * b;
    }
  }
}

// sigma_b as a generalized permutation: row r has its single nonzero in
// column r ^ flip, with value entry(r).
struct PauliString {
  std::size_t flip = 0;
  std::size_t ymask = 0;
  std::size_t zmask = 0;

  PauliString(int n, std::size_t basis) {
    for (int j = 0; j < n; ++j) {
      const std::size_t bit = std::size_t{1} << (n - 1 - j);
      switch (static_cast<PauliLetter>(digit(basis, 4, n, j))) {
        case PauliLetter::I:
          break;
        case PauliLetter::X:
          flip |= bit;
          break;
        case PauliLetter::Y:
          flip |= bit;
          ymask |= bit;
          break;
        case PauliLetter::Z:
          zmask |= bit;
          break;
      }
    }
  }

  Complex entry(std::size_t row) const {
    const int ones = std::popcount(row & ymask);
    const int zeros = std::popcount(ymask) - ones;
    // i^ones * (-i)^zeros = i^(ones - zeros)
    static const Complex powers[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    Complex phase = powers[((ones - zeros) % 4 + 4) % 4];
    if (std::popcount(row & zmask) % 2) phase = -phase;
    return phase;
  }
};

int qubits_of(const Matrix& m) {
  if (m.rows() != m.cols()) throw DimensionError("matrix is not square");
  return qubits_for_dim(m.rows());
}

}  // namespace

// --- Setting / Outcome / BasisIndex ----------------------------------------

Setting Setting::from_index(int n, std::size_t index) {
  check_qubits(n);
  if (index >= setting_count(n)) throw DomainError("setting index out of range");
  std::vector<Axis> axes(n);
  for (int j = 0; j < n; ++j) axes[j] = static_cast<Axis>(digit(index, 3, n, j));
  return Setting(std::move(axes));
}

Setting Setting::parse(std::string_view s) {
  std::vector<Axis> axes;
  for (char c : s) {
    switch (c) {
      case 'x': axes.push_back(Axis::X); break;
      case 'y': axes.push_back(Axis::Y); break;
      case 'z': axes.push_back(Axis::Z); break;
      default: throw DomainError("bad setting '" + std::string(s) + "': expected letters x, y, z");
    }
  }
  if (axes.empty()) throw DomainError("empty setting");
  return Setting(std::move(axes));
}

std::size_t Setting::index() const {
  std::size_t idx = 0;
  for (Axis a : axes_) idx = idx * 3 + static_cast<std::size_t>(a);
  return idx;
}

std::string Setting::str() const {
  std::string s;
  for (Axis a : axes_) s += "xyz"[static_cast<int>(a)];
  return s;
}

Outcome::Outcome(std::vector<int> signs) : signs_(std::move(signs)) {
  for (int v : signs_)
    if (v != 1 && v != -1) throw DomainError("outcome signs must be +1 or -1");
}

Outcome Outcome::from_index(int n, std::size_t index) {
  check_qubits(n);
  if (index >= outcome_count(n)) throw DomainError("outcome index out of range");
  std::vector<int> signs(n);
  for (int j = 0; j < n; ++j) signs[j] = ((index >> (n - 1 - j)) & 1u) ? -1 : 1;
  return Outcome(std::move(signs));
}

Outcome Outcome::parse(std::string_view s) {
  std::vector<int> signs;
  for (char c : s) {
    if (c == '+') signs.push_back(1);
    else if (c == '-') signs.push_back(-1);
    else throw DomainError("bad outcome '" + std::string(s) + "': expected + or -");
  }
  if (signs.empty()) throw DomainError("empty outcome");
  return Outcome(std::move(signs));
}

std::size_t Outcome::index() const {
  std::size_t idx = 0;
  for (int v : signs_) idx = (idx << 1) | (v < 0 ? 1u : 0u);
  return idx;
}

std::string Outcome::str() const {
  std::string s;
  for (int v : signs_) s += v > 0 ? '+' : '-';
  return s;
}

BasisIndex BasisIndex::from_index(int n, std::size_t index) {
  check_qubits(n);
  if (index >= basis_count(n)) throw DomainError("basis index out of range");
  std::vector<PauliLetter> letters(n);
  for (int j = 0; j < n; ++j) letters[j] = static_cast<PauliLetter>(digit(index, 4, n, j));
  return BasisIndex(std::move(letters));
}

BasisIndex BasisIndex::parse(std::string_view s) {
  std::vector<PauliLetter> letters;
  for (char c : s) {
    switch (c) {
      case 'i': letters.push_back(PauliLetter::I); break;
      case 'x': letters.push_back(PauliLetter::X); break;
      case 'y': letters.push_back(PauliLetter::Y); break;
      case 'z': letters.push_back(PauliLetter::Z); break;
      default: throw DomainError("bad basis index '" + std::string(s) + "': expected i, x, y, z");
    }
  }
  if (letters.empty()) throw DomainError("empty basis index");
  return BasisIndex(std::move(letters));
}

std::size_t BasisIndex::index() const {
  std::size_t idx = 0;
  for (PauliLetter l : letters_) idx = idx * 4 + static_cast<std::size_t>(l);
  return idx;
}

std::string BasisIndex::str() const {
  std::string s;
  for (PauliLetter l : letters_) s += "ixyz"[static_cast<int>(l)];
  return s;
}

std::vector<int> BasisIndex::identity_positions() const {
  std::vector<int> pos;
  for (int j = 0; j < qubits(); ++j)
    if (letters_[j] == PauliLetter::I) pos.push_back(j);
  return pos;
}

int BasisIndex::identity_count() const {
  return static_cast<int>(identity_positions().size());
}

// --- ProbabilityTable -------------------------------------------------------

ProbabilityTable::ProbabilityTable(int n)
    : n_(n), settings_(setting_count(n)), outcomes_(outcome_count(n)),
      values_(settings_ * outcomes_, 0.0) {
  check_qubits(n);
}

ProbabilityTable::ProbabilityTable(int n, std::vector<double> values) : ProbabilityTable(n) {
  if (values.size() != values_.size())
    throw DimensionError("probability table for n=" + std::to_string(n) + " needs " +
                         std::to_string(values_.size()) + " values, got " +
                         std::to_string(values.size()));
  values_ = std::move(values);
}

double ProbabilityTable::at(const Setting& a, const Outcome& s) const {
  if (a.qubits() != n_ || s.qubits() != n_) throw DimensionError("setting/outcome length differs from table");
  return at(a.index(), s.index());
}

double ProbabilityTable::max_normalization_defect() const {
  double worst = 0.0;
  for (std::size_t a = 0; a < settings_; ++a) {
    double sum = 0.0;
    for (double v : row(a)) sum += v;
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

double table_distance2(const ProbabilityTable& p, const ProbabilityTable& q) {
  if (p.qubits() != q.qubits()) throw DimensionError("tables have different qubit counts");
  double acc = 0.0;
  const auto pv = p.values();
  const auto qv = q.values();
  for (std::size_t i = 0; i < pv.size(); ++i) {
    const double diff = pv[i] - qv[i];
    acc += diff * diff;
  }
  return acc;
}

// --- Projectors and Pauli matrices -----------------------------------------

Matrix single_qubit_projector(Axis axis, int sign) {
  if (sign != 1 && sign != -1) throw DomainError("sign must be +1 or -1");
  const Rotation u = rotation_for(axis);
  // Row of the rotation is <e_sign|; the projector is |e><e|.
  Vector bra(2);
  if (sign == 1) bra << u.u00, u.u01;
  else bra << u.u10, u.u11;
  const Vector ket = bra.conjugate();
  return ket * ket.adjoint();
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Matrix setting_projector(const Setting& a, const Outcome& s) {
  if (a.qubits() != s.qubits())
    throw DimensionError("setting has " + std::to_string(a.qubits()) + " qubits, outcome has " +
                         std::to_string(s.qubits()));
  if (a.qubits() == 0) throw DimensionError("empty setting");
  Matrix p = single_qubit_projector(a[0], s[0]);
  for (int j = 1; j < a.qubits(); ++j) p = kron(p, single_qubit_projector(a[j], s[j]));
  return p;
}

Matrix pauli_matrix(const BasisIndex& b) {
  const int n = b.qubits();
  check_qubits(n);
  const PauliString ps(n, b.index());
  const auto d = outcome_count(n);
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t r = 0; r < d; ++r) m(r, r ^ ps.flip) = ps.entry(r);
  return m;
}

// --- Forward map ------------------------------------------------------------

std::vector<double> born_distribution(const DensityMatrix& rho, const Setting& a) {
  const int n = rho.qubits();
  if (a.qubits() != n)
    throw DimensionError("setting has " + std::to_string(a.qubits()) + " qubits, state has " +
                         std::to_string(n));
  Matrix h = rho.matrix();
  for (int j = 0; j < n; ++j) apply_to_matrix(rotation_for(a[j]), n, j, h);
  std::vector<double> p(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) p[i] = h(i, i).real();
  return p;
}

ProbabilityTable forward_map(const Matrix& h) {
  const int n = qubits_of(h);
  ProbabilityTable table(n);
  const auto settings = static_cast<std::int64_t>(table.settings());
  QTOMO_OMP_PRAGMA("omp parallel for schedule(static)")
  for (std::int64_t a = 0; a < settings; ++a) {
    Matrix rotated = h;
    for (int j = 0; j < n; ++j)
      apply_to_matrix(rotation_for(static_cast<Axis>(digit(a, 3, n, j))), n, j, rotated);
    auto row = table.row(static_cast<std::size_t>(a));
    for (std::size_t s = 0; s < row.size(); ++s) row[s] = rotated(s, s).real();
  }
  return table;
}

ProbabilityTable forward_probabilities(const DensityMatrix& rho) { return forward_map(rho.matrix()); }

namespace {

void pure_probabilities_rec(int n, int j, std::size_t prefix, std::vector<std::vector<Complex>>& work,
                            std::span<double> out) {
  const std::size_t d = work[0].size();
  if (j == n) {
    const auto& amp = work[n];
    double* dst = out.data() + prefix * d;
    for (std::size_t s = 0; s < d; ++s) dst[s] = std::norm(amp[s]);
    return;
  }
  for (int axis = 0; axis < 3; ++axis) {
    work[j + 1] = work[j];
    apply_to_vector(rotation_for(static_cast<Axis>(axis)), n, j, work[j + 1].data(), d);
    pure_probabilities_rec(n, j + 1, prefix * 3 + axis, work, out);
  }
}

}  // namespace

void pure_state_probabilities(const Vector& v, std::span<double> out) {
  const int n = qubits_for_dim(v.size());
  const std::size_t d = v.size();
  if (out.size() != setting_count(n) * d) throw DimensionError("output span has the wrong size");
  std::vector<std::vector<Complex>> work(n + 1, std::vector<Complex>(d));
  for (std::size_t i = 0; i < d; ++i) work[0][i] = v(i);
  pure_probabilities_rec(n, 0, 0, work, out);
}

// --- Pauli expansion --------------------------------------------------------

double pauli_coefficient(const Matrix& rho, const BasisIndex& b) {
  const int n = qubits_of(rho);
  if (b.qubits() != n) throw DimensionError("basis index length differs from matrix qubits");
  const PauliString ps(n, b.index());
  Complex tr = 0.0;
  for (Eigen::Index r = 0; r < rho.rows(); ++r) {
    const std::size_t c = static_cast<std::size_t>(r) ^ ps.flip;
    tr += rho(r, c) * ps.entry(c);
  }
  return tr.real() / static_cast<double>(rho.rows());
}

std::vector<double> pauli_coefficients(const Matrix& rho) {
  const int n = qubits_of(rho);
  std::vector<double> coeffs(basis_count(n));
  const auto count = static_cast<std::int64_t>(coeffs.size());
  QTOMO_OMP_PRAGMA("omp parallel for schedule(static)")
  for (std::int64_t b = 0; b < count; ++b) {
    const PauliString ps(n, static_cast<std::size_t>(b));
    Complex tr = 0.0;
    for (Eigen::Index r = 0; r < rho.rows(); ++r) {
      const std::size_t c = static_cast<std::size_t>(r) ^ ps.flip;
      tr += rho(r, c) * ps.entry(c);
    }
    coeffs[b] = tr.real() / static_cast<double>(rho.rows());
  }
  return coeffs;
}

Matrix from_pauli_coefficients(std::span<const double> coeffs, int n) {
  check_qubits(n);
  if (coeffs.size() != basis_count(n)) throw DimensionError("need 4^n Pauli coefficients");
  const auto d = outcome_count(n);
  Matrix m = Matrix::Zero(d, d);
  for (std::size_t b = 0; b < coeffs.size(); ++b) {
    if (coeffs[b] == 0.0) continue;
    const PauliString ps(n, b);
    for (std::size_t r = 0; r < d; ++r) m(r, r ^ ps.flip) += coeffs[b] * ps.entry(r);
  }
  return m;
}

// --- Design matrix ----------------------------------------------------------

int design_entry(int n, std::size_t setting, std::size_t outcome, std::size_t basis) {
  int value = 1;
  for (int j = 0; j < n; ++j) {
    const auto letter = digit(basis, 4, n, j);
    if (letter == 0) continue;
    if (digit(setting, 3, n, j) + 1 != letter) return 0;
    if ((outcome >> (n - 1 - j)) & 1u) value = -value;
  }
  return value;
}

int design_entry(const Setting& a, const Outcome& s, const BasisIndex& b) {
  const int n = a.qubits();
  if (s.qubits() != n || b.qubits() != n) throw DimensionError("setting, outcome and basis lengths differ");
  return design_entry(n, a.index(), s.index(), b.index());
}

std::pair<double, double> gram_extreme_eigenvalues(int n) {
  check_qubits(n);
  if (n > 4) throw ResourceError("gram_extreme_eigenvalues materializes a 6^n x 4^n matrix; n <= 4 only");
  const auto rows = setting_count(n) * outcome_count(n);
  const auto cols = basis_count(n);
  Eigen::MatrixXd design(rows, cols);
  for (std::size_t a = 0; a < setting_count(n); ++a)
    for (std::size_t s = 0; s < outcome_count(n); ++s)
      for (std::size_t b = 0; b < cols; ++b)
        design(a * outcome_count(n) + s, b) = design_entry(n, a, s, b);
  const Eigen::MatrixXd gram = design.transpose() * design;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  return {ev.minCoeff(), ev.maxCoeff()};
}

namespace serial {

ProbabilityTable forward_map(const Matrix& h) {
  const int n = qubits_of(h);
  ProbabilityTable table(n);
  for (std::size_t a = 0; a < table.settings(); ++a) {
    const Setting setting = Setting::from_index(n, a);
    for (std::size_t s = 0; s < table.outcomes(); ++s) {
      const Matrix proj = setting_projector(setting, Outcome::from_index(n, s));
      table.at(a, s) = h.cwiseProduct(proj.transpose()).sum().real();
    }
  }
  return table;
}

}  // namespace serial

}  // namespace qtomo
