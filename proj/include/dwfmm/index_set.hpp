#pragma once

#include <algorithm>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "types.hpp"

namespace dwfmm {

using BigInt = boost::multiprecision::cpp_int;

// Multi-index set { alpha >= 0 : sum_k omega_k alpha_k <= q }, enumerated in
// graded lexicographic order (weighted degree first, lexicographic
// tie-break). The ordering fixes Vandermonde row/column layout run-to-run.
struct WeightedIndexSet {
  Index d = 0;
  Scalar q = 0;
  Vector omega;
  std::vector<MultiIndex> indices;
  MultiIndex max_degree;  // componentwise maximum, for shared basis evals

  Index size() const { return static_cast<Index>(indices.size()); }

  Scalar weighted_degree(const MultiIndex &alpha) const {
    Scalar s = 0;
    for (Index k = 0; k < d; ++k) s += omega[k] * alpha[k];
    return s;
  }
};

// admission tolerance for the weighted degree constraint: omega entries are
// logarithms, so boundary sums rarely evaluate exactly
inline constexpr Scalar kDegreeTolerance = 1e-12;

// upper bound prod_k (q/(k*omega_k) + 1) for ascending positive omega
inline Scalar cardinality_bound(const Vector &omega, Scalar q) {
  const Index d = omega.size();
  if (d == 0) throw std::invalid_argument("cardinality_bound: empty omega");
  for (Index k = 0; k < d; ++k) {
    if (!(omega[k] > 0))
      throw std::invalid_argument("cardinality_bound: non-positive weight");
    if (k > 0 && omega[k] < omega[k - 1])
      throw std::invalid_argument("cardinality_bound: omega must be ascending");
  }
  if (q < 0) return 0;
  Scalar prod = 1;
  for (Index k = 0; k < d; ++k)
    prod *= q / (Scalar(k + 1) * omega[k]) + 1;
  return prod;
}

inline WeightedIndexSet enumerate_index_set(const Vector &omega, Scalar q,
                                            Index cap = 10'000'000) {
  const Index d = omega.size();
  if (d == 0) throw std::invalid_argument("enumerate: empty omega");

  WeightedIndexSet set;
  set.d = d;
  set.q = q;
  set.omega = omega;
  set.max_degree = MultiIndex::Zero(d);
  if (q < -kDegreeTolerance) return set;  // empty set, any omega

  for (Index k = 0; k < d; ++k)
    if (!(omega[k] > 0))
      throw std::invalid_argument("enumerate: non-positive weight");

  {
    Vector sorted = omega;
    std::sort(sorted.begin(), sorted.end());
    if (cardinality_bound(sorted, q) > Scalar(cap))
      throw std::invalid_argument("enumerate: predicted cardinality above cap");
  }

  MultiIndex alpha = MultiIndex::Zero(d);
  // depth-first over dimensions, spending the remaining budget
  auto recurse = [&](auto &&self, Index k, Scalar spent) -> void {
    if (k == d) {
      set.indices.push_back(alpha);
      if (set.size() > cap)
        throw std::invalid_argument("enumerate: cardinality above cap");
      return;
    }
    for (int a = 0;; ++a) {
      alpha[k] = a;
      const Scalar used = spent + omega[k] * a;
      if (used > q + kDegreeTolerance) break;
      self(self, k + 1, used);
    }
    alpha[k] = 0;
  };
  recurse(recurse, 0, 0);

  std::sort(set.indices.begin(), set.indices.end(),
            [&](const MultiIndex &a, const MultiIndex &b) {
              const Scalar wa = set.weighted_degree(a);
              const Scalar wb = set.weighted_degree(b);
              if (wa != wb) return wa < wb;
              return std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                                  b.end());
            });
  for (const MultiIndex &a : set.indices)
    set.max_degree = set.max_degree.cwiseMax(a);
  return set;
}

// counts for the two classical baselines: full tensor product (q+1)^d and
// unweighted total degree C(q+d, d)
inline BigInt tpi_count(int q, int d) {
  if (q < 0 || d < 0) throw std::invalid_argument("tpi_count: negative input");
  BigInt r = 1;
  for (int k = 0; k < d; ++k) r *= q + 1;
  return r;
}

inline BigInt tdi_count(int q, int d) {
  if (q < 0 || d < 0) throw std::invalid_argument("tdi_count: negative input");
  BigInt num = 1, den = 1;
  for (int k = 1; k <= d; ++k) {
    num *= q + k;
    den *= k;
  }
  return num / den;
}

}  // namespace dwfmm
