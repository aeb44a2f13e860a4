#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "cluster_tree.hpp"

namespace dwfmm {

// dist(B_nu, B_nu') >= eta * max{diam B_nu, diam B_nu'}, boundary admissible
inline bool is_admissible(const BoundingBox &a, const BoundingBox &b,
                          Scalar eta) {
  if (!(eta > 0)) throw std::invalid_argument("is_admissible: eta must be > 0");
  return box_dist(a, b) >= eta * std::max(box_diam(a), box_diam(b));
}

// Farfield/nearfield classification of cluster pairs. Farfield pairs are
// maximal admissible blocks; nearfield pairs are leaf x leaf remainders.
// Together their index ranges tile [0,N)^2 exactly.
struct BlockPartition {
  std::vector<std::pair<Index, Index>> farfield;
  std::vector<std::pair<Index, Index>> nearfield;
  Scalar eta = 0;

  // total entries covered, for the N^2 tiling check
  std::uint64_t coverage(const ClusterTree &tree) const {
    std::uint64_t total = 0;
    for (const auto &[a, b] : farfield)
      total += std::uint64_t(tree.cluster(a).size()) * tree.cluster(b).size();
    for (const auto &[a, b] : nearfield)
      total += std::uint64_t(tree.cluster(a).size()) * tree.cluster(b).size();
    return total;
  }
};

// Dual recursion from (root, root). When only one side still has children,
// that side is refined against the other cluster unchanged, which keeps
// coverage exact for trees whose leaves sit on different levels.
inline BlockPartition build_partition(const ClusterTree &tree, Scalar eta) {
  BlockPartition partition;
  partition.eta = eta;
  auto recurse = [&](auto &&self, Index a, Index b) -> void {
    const Cluster &ca = tree.cluster(a);
    const Cluster &cb = tree.cluster(b);
    if (is_admissible(ca.bbox, cb.bbox, eta)) {
      partition.farfield.emplace_back(a, b);
      return;
    }
    if (ca.is_leaf() && cb.is_leaf()) {
      partition.nearfield.emplace_back(a, b);
      return;
    }
    if (ca.is_leaf()) {
      self(self, a, cb.child[0]);
      self(self, a, cb.child[1]);
    } else if (cb.is_leaf()) {
      self(self, ca.child[0], b);
      self(self, ca.child[1], b);
    } else {
      self(self, ca.child[0], cb.child[0]);
      self(self, ca.child[0], cb.child[1]);
      self(self, ca.child[1], cb.child[0]);
      self(self, ca.child[1], cb.child[1]);
    }
  };
  recurse(recurse, tree.root().id, tree.root().id);
  return partition;
}

}  // namespace dwfmm
