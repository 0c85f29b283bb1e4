#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace qtomo {

using Complex = std::complex<double>;

/// Dense complex matrix. Used for Hermitian operators that are not
/// (yet) known to be density matrices: projectors, Pauli strings,
/// inversion estimates.
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

using Rng = std::mt19937_64;

/// Deterministic generator for the substream identified by `stream`
/// under a master seed. Distinct stream tuples give unrelated sequences.
Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream = {});

/// Integer power for small non-negative exponents.
constexpr std::size_t ipow(std::size_t base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

/// Number of qubits n for a dimension d = 2^n; throws DimensionError otherwise.
int qubits_for_dim(Eigen::Index d);

}  // namespace qtomo
