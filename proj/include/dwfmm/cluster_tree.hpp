#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include "geometry.hpp"
#include "types.hpp"

namespace dwfmm {

struct Cluster {
  Index id = -1;
  Index parent = -1;
  int level = 0;
  Index begin = 0, end = 0;  // half-open range into the reordered point set
  std::array<Index, 2> child = {-1, -1};
  Index split_dim = -1;  // -1 for leaves
  BoundingBox bbox;

  bool is_leaf() const { return child[0] < 0; }
  Index size() const { return end - begin; }
};

// Cardinality-balanced binary tree over a point set. Construction reorders
// the points so every cluster is a contiguous index range; permutation[i] on
// the stored points is the row of the *input* set now living at tree row i.
// Any permutation already attached to the input (e.g. provenance from a
// train/test split) is deliberately not chained through, since consumers map
// values given in input order.
class ClusterTree {
 public:
  static ClusterTree build(PointSet points, Index leaf_size) {
    if (points.size() < 1)
      throw std::invalid_argument("ClusterTree: empty point set");
    if (leaf_size < 1)
      throw std::invalid_argument("ClusterTree: leaf_size must be >= 1");

    ClusterTree tree;
    tree.leaf_size_ = leaf_size;
    const Index n = points.size();
    const Index d = points.dim();
    std::vector<Index> order(n);
    std::iota(order.begin(), order.end(), Index(0));
    const PointMatrix &c = points.coords;

    auto range_bbox = [&](Index begin, Index end) {
      BoundingBox box;
      box.lo = c.row(order[begin]).transpose();
      box.hi = box.lo;
      for (Index i = begin + 1; i < end; ++i)
        for (Index k = 0; k < d; ++k) {
          const Scalar v = c(order[i], k);
          box.lo[k] = std::min(box.lo[k], v);
          box.hi[k] = std::max(box.hi[k], v);
        }
      return box;
    };

    auto split = [&](auto &&self, Index begin, Index end, int level,
                     Index parent) -> Index {
      const Index id = static_cast<Index>(tree.clusters_.size());
      tree.clusters_.push_back(
          {id, parent, level, begin, end, {-1, -1}, -1, range_bbox(begin, end)});
      tree.depth_ = std::max(tree.depth_, level);
      if (end - begin <= leaf_size) {
        // canonical within-leaf order so the permutation is reproducible
        // independently of the selection algorithm's internals
        std::sort(order.begin() + begin, order.begin() + end);
        tree.leaves_.push_back(id);
        return id;
      }
      // split along the longest box edge, lowest dimension on ties
      const Vector extent = tree.clusters_[id].bbox.hi - tree.clusters_[id].bbox.lo;
      Index dim = 0;
      for (Index k = 1; k < d; ++k)
        if (extent[k] > extent[dim]) dim = k;
      const Index mid = begin + (end - begin + 1) / 2;
      std::nth_element(order.begin() + begin, order.begin() + mid,
                       order.begin() + end, [&](Index a, Index b) {
                         if (c(a, dim) != c(b, dim)) return c(a, dim) < c(b, dim);
                         return a < b;  // duplicates split by original index
                       });
      tree.clusters_[id].split_dim = dim;
      const Index left = self(self, begin, mid, level + 1, id);
      const Index right = self(self, mid, end, level + 1, id);
      tree.clusters_[id].child = {left, right};
      return id;
    };
    split(split, 0, n, 0, -1);

    // apply the accumulated ordering to the points
    PointSet reordered;
    reordered.coords.resize(n, d);
    reordered.permutation.resize(n);
    for (Index i = 0; i < n; ++i) {
      reordered.coords.row(i) = c.row(order[i]);
      reordered.permutation[i] = order[i];
    }
    tree.points_ = std::move(reordered);
    return tree;
  }

  const PointSet &points() const { return points_; }
  const Cluster &cluster(Index id) const { return clusters_[id]; }
  const Cluster &root() const { return clusters_[0]; }
  const std::vector<Cluster> &clusters() const { return clusters_; }
  Index num_clusters() const { return static_cast<Index>(clusters_.size()); }
  const std::vector<Index> &leaves() const { return leaves_; }
  int depth() const { return depth_; }
  Index leaf_size() const { return leaf_size_; }

  std::vector<Index> level_clusters(int j) const {
    if (j < 0 || j > depth_)
      throw std::invalid_argument("level_clusters: level beyond tree depth");
    std::vector<Index> ids;
    for (const Cluster &nu : clusters_)
      if (nu.level == j) ids.push_back(nu.id);
    return ids;
  }

 private:
  std::vector<Cluster> clusters_;  // pre-order: parents precede children
  std::vector<Index> leaves_;
  PointSet points_;
  Index leaf_size_ = 0;
  int depth_ = 0;
};

}  // namespace dwfmm
