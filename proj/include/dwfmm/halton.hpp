#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>

#include "types.hpp"

namespace dwfmm {

inline constexpr std::array<int, 100> kHaltonPrimes = {
    2,   3,   5,   7,   11,  13,  17,  19,  23,  29,  31,  37,  41,  43,  47,
    53,  59,  61,  67,  71,  73,  79,  83,  89,  97,  101, 103, 107, 109, 113,
    127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193, 197,
    199, 211, 223, 227, 229, 233, 239, 241, 251, 257, 263, 269, 271, 277, 281,
    283, 293, 307, 311, 313, 317, 331, 337, 347, 349, 353, 359, 367, 373, 379,
    383, 389, 397, 401, 409, 419, 421, 431, 433, 439, 443, 449, 457, 461, 463,
    467, 479, 487, 491, 499, 503, 509, 521, 523, 541};

inline Scalar radical_inverse(std::uint64_t n, int base) {
  const Scalar inv = Scalar(1) / base;
  Scalar factor = inv, value = 0;
  while (n) {
    value += factor * static_cast<Scalar>(n % base);
    n /= base;
    factor *= inv;
  }
  return value;
}

// i-th Halton point in (0,1)^d; the sequence starts at index 1 internally so
// the all-zeros point never appears
inline Vector halton(std::uint64_t i, Index d) {
  if (d <= 0 || d > static_cast<Index>(kHaltonPrimes.size()))
    throw std::invalid_argument("halton: dimension out of range");
  Vector x(d);
  for (Index k = 0; k < d; ++k) x[k] = radical_inverse(i + 1, kHaltonPrimes[k]);
  return x;
}

// rows i0..i0+count-1 of the Halton sequence
inline PointMatrix halton_block(std::uint64_t i0, Index count, Index d) {
  if (d <= 0 || d > static_cast<Index>(kHaltonPrimes.size()))
    throw std::invalid_argument("halton_block: dimension out of range");
  PointMatrix pts(count, d);
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < count; ++i)
    for (Index k = 0; k < d; ++k)
      pts(i, k) = radical_inverse(i0 + i + 1, kHaltonPrimes[k]);
  return pts;
}

}  // namespace dwfmm
