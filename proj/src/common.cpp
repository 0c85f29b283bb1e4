#include <string>
#include <vector>

#include "qtomo/errors.hpp"
#include "qtomo/types.hpp"

namespace qtomo {

Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * stream.size());
  auto push = [&](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v & 0xffffffffu));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  // Tag the tuple length so {s} and {s, 0} differ.
  push(0x9e3779b97f4a7c15ull ^ stream.size());
  for (auto v : stream) push(v);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

int qubits_for_dim(Eigen::Index d) {
  if (d < 2) throw DimensionError("dimension " + std::to_string(d) + " is not 2^n with n >= 1");
  int n = 0;
  Eigen::Index v = d;
  while (v > 1) {
    if (v % 2 != 0) throw DimensionError("dimension " + std::to_string(d) + " is not a power of two");
    v /= 2;
    ++n;
  }
  return n;
}

}  // namespace qtomo
