#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "halton.hpp"
#include "index_set.hpp"
#include "legendre.hpp"
#include "types.hpp"

namespace dwfmm {

// Interpolation data on the reference cube: approximate Fekete nodes for the
// weighted index set and the LU-factorized Vandermonde matrix
// V[a, a'] = p_{a'}(xi_a). Immutable once built; shared by every cluster.
struct InterpolationScheme {
  WeightedIndexSet index_set;
  PointMatrix nodes;  // n x d, rows in pivot order of the selection QR
  Matrix vandermonde;
  Eigen::PartialPivLU<Matrix> lu;    // factors V
  Eigen::PartialPivLU<Matrix> lu_t;  // factors V^T
  Scalar condition_estimate = 0;

  Index rank() const { return index_set.size(); }
  Index dim() const { return index_set.d; }
};

inline constexpr Index kFeketeCandidateCap = 1'000'000;

inline Index default_candidate_count(Index n_basis) {
  return std::min<Index>(20 * n_basis, kFeketeCandidateCap);
}

// factorize the Vandermonde matrix for a given node set, e.g. one restored
// from a cache file
inline InterpolationScheme scheme_from_nodes(const WeightedIndexSet &set,
                                             PointMatrix nodes) {
  if (nodes.rows() != set.size() || nodes.cols() != set.d)
    throw std::invalid_argument("scheme_from_nodes: node shape mismatch");
  InterpolationScheme scheme;
  scheme.index_set = set;
  scheme.nodes = std::move(nodes);
  scheme.vandermonde = tensor_eval_rows(set, scheme.nodes);
  scheme.lu.compute(scheme.vandermonde);
  scheme.lu_t.compute(scheme.vandermonde.transpose());

  const auto udiag = scheme.lu.matrixLU().diagonal();
  Scalar dmax = 0, dmin = std::numeric_limits<Scalar>::infinity();
  for (Index k = 0; k < scheme.rank(); ++k) {
    dmax = std::max(dmax, std::abs(udiag[k]));
    dmin = std::min(dmin, std::abs(udiag[k]));
  }
  if (!(dmin > 0))
    throw std::runtime_error("scheme_from_nodes: singular Vandermonde matrix");
  scheme.condition_estimate = dmax / dmin;
  return scheme;
}

// Greedy volume-maximizing node selection: evaluate the basis on Halton
// candidates, run column-pivoted QR on the transposed candidate Vandermonde,
// and keep the first n pivot rows as interpolation nodes. The `seed` keeps
// the cache key stable across callers; the Halton candidates themselves are
// deterministic.
inline InterpolationScheme approximate_fekete(const WeightedIndexSet &set,
                                              Index candidate_count = 0,
                                              std::uint64_t seed = 0) {
  const Index n = set.size();
  if (n == 0) throw std::invalid_argument("approximate_fekete: empty set");
  if (candidate_count == 0)
    candidate_count = default_candidate_count(n);
  candidate_count = std::min(candidate_count, kFeketeCandidateCap);
  if (candidate_count < n)
    throw std::invalid_argument(
        "approximate_fekete: candidate_count below basis size");

  const PointMatrix candidates = halton_block(0, candidate_count, set.d);
  const Matrix wt = tensor_eval_rows(set, candidates).transpose();  // n x M

  Eigen::ColPivHouseholderQR<Matrix> qr(wt);
  const auto &pivots = qr.colsPermutation().indices();
  const auto rdiag = qr.matrixR().diagonal();
  const Scalar leading = std::abs(rdiag[0]);
  for (Index k = 0; k < n; ++k)
    if (std::abs(rdiag[k]) < 1e-12 * leading)
      throw std::runtime_error(
          "approximate_fekete: candidate set insufficient; increase "
          "candidate_count");

  PointMatrix nodes(n, set.d);
  for (Index k = 0; k < n; ++k) nodes.row(k) = candidates.row(pivots[k]);
  (void)seed;
  return scheme_from_nodes(set, std::move(nodes));
}

// V^{-1} * rhs, or V^{-T} * rhs when transposed, via the stored factorization
inline Matrix vandermonde_solve(const InterpolationScheme &scheme,
                                const Matrix &rhs, bool transposed = false) {
  if (rhs.rows() != scheme.rank())
    throw std::invalid_argument("vandermonde_solve: row count mismatch");
  return transposed ? scheme.lu_t.solve(rhs) : scheme.lu.solve(rhs);
}

// Lower bound on the Lebesgue constant: max over Halton sample points of the
// l1 norm of the Lagrange basis values, obtained from V^T c = p(x). The seed
// offsets the Halton stream so estimates over growing sample counts nest.
inline Scalar lebesgue_estimate(const InterpolationScheme &scheme,
                                Index sample_count, std::uint64_t seed = 0) {
  if (sample_count <= 0)
    throw std::invalid_argument("lebesgue_estimate: need samples");
  const PointMatrix samples = halton_block(seed, sample_count, scheme.dim());
  const Matrix basis =
      tensor_eval_rows(scheme.index_set, samples).transpose();  // n x m
  const Matrix lagrange = scheme.lu_t.solve(basis);
  return lagrange.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace dwfmm
