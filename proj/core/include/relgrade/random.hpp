#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace relgrade::rng {

// Deterministic sampling helpers. The standard distributions are
// implementation-defined in how they consume engine output, so everything
// that feeds a frozen test value or a reproducibility contract goes through
// these instead.

// Uniform double in [0, 1): 53 random bits.
inline double u01(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1]; never returns 0, so -log(u) is finite.
inline double u01_open(std::mt19937_64& eng) {
  return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
}

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t below(std::mt19937_64& eng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

// Fisher-Yates using below(); deterministic for a given engine state.
template <typename T>
void shuffle(std::vector<T>& v, std::mt19937_64& eng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(below(eng, i));
    std::swap(v[i - 1], v[j]);
  }
}

// Standard normal via Box-Muller; one engine draw pattern, no cached state.
inline double normal(std::mt19937_64& eng) {
  double u1 = u01_open(eng);
  double u2 = u01(eng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
}

inline double uniform(std::mt19937_64& eng, double lo, double hi) {
  return lo + (hi - lo) * u01(eng);
}

}  // namespace relgrade::rng
