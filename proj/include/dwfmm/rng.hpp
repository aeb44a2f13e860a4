#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace dwfmm {

// All randomness flows through this wrapper so results reproduce from a
// single seed independently of the standard library's distribution
// implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // uniform in [0,1) with full 53-bit resolution
  Scalar uniform() { return static_cast<Scalar>(gen_() >> 11) * 0x1.0p-53; }

  Scalar uniform(Scalar lo, Scalar hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in {0,...,n-1}, rejection sampled to avoid modulo bias
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below: empty range");
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return v % n;
  }

  std::mt19937_64 &engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

// k distinct indices from {0,...,n-1} via partial Fisher-Yates, returned
// sorted ascending
inline std::vector<Index> sample_without_replacement(Rng &rng, Index n,
                                                     Index k) {
  if (k < 0 || k > n)
    throw std::invalid_argument("sample_without_replacement: k out of range");
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), Index(0));
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace dwfmm
