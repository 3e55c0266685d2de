#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace tonekit {

// All randomness in the library flows through these helpers so that a
// seed pins byte-identical behaviour. Distributions are hand-rolled:
// the standard <random> distributions are implementation-defined and
// would tie reproducibility to one standard library.

inline std::uint64_t rand_u64(std::mt19937_64& rng) { return rng(); }

// Uniform in [0, n). Modulo bias is negligible for the small n used here
// and keeps the draw sequence trivially auditable.
inline std::size_t rand_below(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

// Uniform double in [0, 1) with 53 random bits.
inline double rand_unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform double in [lo, hi).
inline double rand_range(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * rand_unit(rng);
}

// Fisher-Yates shuffle driven by rand_below, identical on every platform.
template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i)
    std::swap(items[i - 1], items[rand_below(rng, i)]);
}

}  // namespace tonekit
