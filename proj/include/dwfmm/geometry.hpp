#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "rng.hpp"
#include "types.hpp"

namespace dwfmm {

struct PointSet {
  PointMatrix coords;              // one point per row
  std::vector<Index> permutation;  // row i held position permutation[i] before
                                   // any reordering

  Index size() const { return coords.rows(); }
  Index dim() const { return coords.cols(); }

  static PointSet from_coords(PointMatrix c) {
    if (c.rows() == 0 || c.cols() == 0)
      throw std::invalid_argument("PointSet: empty coordinate matrix");
    if (!c.allFinite())
      throw std::invalid_argument("PointSet: non-finite coordinate");
    PointSet p;
    p.permutation.resize(c.rows());
    std::iota(p.permutation.begin(), p.permutation.end(), Index(0));
    p.coords = std::move(c);
    return p;
  }
};

struct BoundingBox {
  Vector lo, hi;

  Index dim() const { return lo.size(); }
  bool contains(const Vector &x, Scalar slack = 0) const {
    return (x.array() >= lo.array() - slack).all() &&
           (x.array() <= hi.array() + slack).all();
  }
};

// affine map of the reference cube [0,1]^d onto an axis-parallel box,
// x = shift + scale .* xhat
struct AffineCubeMap {
  Vector shift, scale;

  static AffineCubeMap for_box(const BoundingBox &box) {
    return {box.lo, box.hi - box.lo};
  }

  Vector forward(const Vector &xhat) const {
    return shift + scale.cwiseProduct(xhat);
  }

  // degenerate edges collapse every preimage onto the midpoint 0.5
  Vector inverse(const Vector &x) const {
    Vector xhat(x.size());
    for (Index k = 0; k < x.size(); ++k)
      xhat[k] = scale[k] > Scalar(0) ? (x[k] - shift[k]) / scale[k] : 0.5;
    return xhat;
  }
};

inline BoundingBox compute_bounding_box(const PointSet &points, Index begin,
                                        Index end) {
  if (begin >= end || begin < 0 || end > points.size())
    throw std::invalid_argument("compute_bounding_box: empty cluster");
  const Index d = points.dim();
  BoundingBox box;
  box.lo = points.coords.row(begin).transpose();
  box.hi = box.lo;
  for (Index i = begin + 1; i < end; ++i)
    for (Index k = 0; k < d; ++k) {
      const Scalar v = points.coords(i, k);
      box.lo[k] = std::min(box.lo[k], v);
      box.hi[k] = std::max(box.hi[k], v);
    }
  return box;
}

inline BoundingBox compute_bounding_box(const PointSet &points) {
  return compute_bounding_box(points, 0, points.size());
}

inline Scalar box_diam(const BoundingBox &box) {
  return (box.hi - box.lo).norm();
}

inline Scalar box_dist(const BoundingBox &a, const BoundingBox &b) {
  if (a.dim() != b.dim())
    throw std::invalid_argument("box_dist: dimension mismatch");
  Scalar sum = 0;
  for (Index k = 0; k < a.dim(); ++k) {
    const Scalar gap =
        std::max({Scalar(0), a.lo[k] - b.hi[k], b.lo[k] - a.hi[k]});
    sum += gap * gap;
  }
  return std::sqrt(sum);
}

struct SeparationRadius {
  Scalar value = 0;
  bool approximate = false;  // true when estimated from a subsample
};

// minimal pairwise distance; the O(N^2) scan switches to a random subsample
// of `cap` points beyond the cap since the value only seeds a hyperparameter
// grid bound
inline SeparationRadius separation_radius(const PointSet &points,
                                          Index cap = 20000,
                                          std::uint64_t seed = 0) {
  const Index n = points.size();
  if (n < 2) throw std::invalid_argument("separation_radius: need N >= 2");

  std::vector<Index> idx;
  SeparationRadius result;
  if (n > cap) {
    Rng rng(seed);
    idx = sample_without_replacement(rng, n, cap);
    result.approximate = true;
  } else {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), Index(0));
  }

  const Index m = static_cast<Index>(idx.size());
  Scalar min_sq = std::numeric_limits<Scalar>::infinity();
#pragma omp parallel for schedule(dynamic, 32) reduction(min : min_sq)
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) {
      const Scalar d2 =
          (points.coords.row(idx[i]) - points.coords.row(idx[j])).squaredNorm();
      min_sq = std::min(min_sq, d2);
    }
  result.value = std::sqrt(min_sq);
  return result;
}

}  // namespace dwfmm
