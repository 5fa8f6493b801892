#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace phasewalk {

// std::mt19937_64 output is fixed by the standard; the distributions are not,
// so bounded draws and shuffles are done here to keep builds reproducible.
using Rng = std::mt19937_64;

inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  // Rejection sampling on the top of the range removes modulo bias.
  const std::uint64_t limit = Rng::max() - Rng::max() % bound;
  std::uint64_t v = rng();
  while (v >= limit) v = rng();
  return v % bound;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace phasewalk
