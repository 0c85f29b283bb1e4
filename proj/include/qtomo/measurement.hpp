#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "qtomo/pauli.hpp"
#include "qtomo/states.hpp"

namespace qtomo {

/// Counts n_{a,s} from a complete measurement: every one of the 3^n
/// settings measured m times.
class Dataset {
 public:
  /// Checks that every setting's counts sum to m.
  Dataset(int n, std::int64_t m, std::vector<std::int64_t> counts);

  int qubits() const noexcept { return n_; }
  std::int64_t shots_per_setting() const noexcept { return m_; }
  /// Quantum sample size N = m * 3^n.
  std::int64_t total_shots() const noexcept { return m_ * static_cast<std::int64_t>(setting_count(n_)); }

  std::int64_t count(std::size_t setting, std::size_t outcome) const {
    return counts_[setting * outcome_count(n_) + outcome];
  }
  std::int64_t count(const Setting& a, const Outcome& s) const;
  const std::vector<std::int64_t>& counts() const noexcept { return counts_; }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  int n_;
  std::int64_t m_;
  std::vector<std::int64_t> counts_;
};

/// Multinomial counts for each setting drawn from the Born distribution.
/// Setting a uses the substream make_rng(seed, {a}), so the result does
/// not depend on thread scheduling.
Dataset simulate_dataset(const DensityMatrix& rho, std::int64_t m, std::uint64_t seed);

/// p_hat = counts / m.
ProbabilityTable empirical_frequencies(const Dataset& data);

/// Multinomial(m, p) by sequential conditional binomials.
std::vector<std::int64_t> sample_multinomial(std::int64_t m, std::span<const double> p, Rng& rng);

// CSV format:
//   # n=<int> m=<int>
//   setting,outcome,count
//   x,+,5
//   ...
// Rows are written for every (setting, outcome) in canonical order. The
// reader accepts any row order, treats absent outcome rows as zero, and
// rejects absent settings.

void write_dataset(std::ostream& os, const Dataset& data);
Dataset read_dataset(std::istream& is);
void save_dataset(const Dataset& data, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

namespace serial {

Dataset simulate_dataset(const DensityMatrix& rho, std::int64_t m, std::uint64_t seed);

}  // namespace serial

}  // namespace qtomo
