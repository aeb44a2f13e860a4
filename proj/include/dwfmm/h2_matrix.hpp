#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "block_partition.hpp"
#include "cluster_tree.hpp"
#include "interpolation.hpp"
#include "kernel.hpp"
#include "rng.hpp"
#include "weights.hpp"

namespace dwfmm {

namespace internal {
inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(
             std::chrono::steady_clock::now() - t0)
      .count();
}
}  // namespace internal

// Nested cluster bases sharing one interpolation scheme: leaf matrices
// P_nu[i,a] = p_a(inv(a_nu)(x_i)) and, for every non-root cluster, the
// transfer matrix expressing its basis in the parent's frame.
struct ClusterBasisSet {
  std::vector<Matrix> leaf_basis;        // by cluster id, empty for non-leaves
  std::vector<Matrix> transfer;          // by cluster id, empty for the root
  std::vector<PointMatrix> mapped_nodes;  // a_nu(fekete nodes), by cluster id
};

inline ClusterBasisSet build_cluster_bases(const ClusterTree &tree,
                                           const InterpolationScheme &scheme) {
  const Index m = tree.num_clusters();
  const Index n = scheme.rank();
  const Index d = scheme.dim();
  ClusterBasisSet bases;
  bases.leaf_basis.resize(m);
  bases.transfer.resize(m);
  bases.mapped_nodes.resize(m);

  std::vector<AffineCubeMap> maps(m);
  for (Index id = 0; id < m; ++id) {
    maps[id] = AffineCubeMap::for_box(tree.cluster(id).bbox);
    PointMatrix mapped(n, d);
    for (Index k = 0; k < n; ++k)
      mapped.row(k) =
          maps[id].forward(scheme.nodes.row(k).transpose()).transpose();
    bases.mapped_nodes[id] = std::move(mapped);
  }

#pragma omp parallel for schedule(dynamic)
  for (Index id = 0; id < m; ++id) {
    const Cluster &nu = tree.cluster(id);
    if (nu.is_leaf()) {
      PointMatrix local(nu.size(), d);
      for (Index i = 0; i < nu.size(); ++i)
        local.row(i) =
            maps[id]
                .inverse(tree.points().coords.row(nu.begin + i).transpose())
                .transpose();
      bases.leaf_basis[id] = tensor_eval_rows(scheme.index_set, local);
    }
    if (nu.parent >= 0) {
      // parent-frame polynomials sampled at this cluster's mapped nodes
      PointMatrix in_parent(n, d);
      for (Index k = 0; k < n; ++k)
        in_parent.row(k) =
            maps[nu.parent]
                .inverse(bases.mapped_nodes[id].row(k).transpose())
                .transpose();
      bases.transfer[id] =
          scheme.lu.solve(tensor_eval_rows(scheme.index_set, in_parent));
    }
  }
  return bases;
}

// Kernel-independent part of the compressed matrix: tree, block partition,
// interpolation scheme and cluster bases. One structure serves every kernel
// length scale on the same data.
struct H2Structure {
  ClusterTree tree;
  BlockPartition partition;
  InterpolationScheme scheme;
  ClusterBasisSet bases;
  double build_ms = 0;

  Index size() const { return tree.points().size(); }

  static H2Structure build(PointSet points, const AnalyticityProfile &profile,
                           Scalar q, Index leaf_size = 0,
                           Index candidate_count = 0, std::uint64_t seed = 0) {
    if (points.dim() != profile.dim())
      throw std::invalid_argument("H2Structure: dimension mismatch");
    const auto t0 = std::chrono::steady_clock::now();
    H2Structure s;
    WeightedIndexSet set = enumerate_index_set(profile.omega, q);
    s.scheme = approximate_fekete(set, candidate_count, seed);
    if (leaf_size <= 0)
      leaf_size = std::max<Index>(32, 2 * s.scheme.rank());
    s.tree = ClusterTree::build(std::move(points), leaf_size);
    s.partition = build_partition(s.tree, profile.eta);
    s.bases = build_cluster_bases(s.tree, s.scheme);
    s.build_ms = internal::elapsed_ms(t0);
    return s;
  }
};

struct AssemblyStats {
  double structure_ms = 0;
  double coupling_ms = 0;
  double nearfield_ms = 0;
  std::uint64_t mem_floats = 0;
};

// H2 representation of the kernel matrix: farfield blocks as
// P_nu C_{nu,nu'} P_nu'^T with C = V^{-1} S V^{-T}, nearfield blocks dense.
// Only blocks with nu <= nu' are stored; the mirror block applies the
// transpose, which enforces exact symmetry of the operator.
class CompressedKernelMatrix {
 public:
  template <typename Kernel>
  static CompressedKernelMatrix assemble(std::shared_ptr<const H2Structure> s,
                                         Kernel &&kernel, Scalar ridge = 0) {
    if (!s) throw std::invalid_argument("assemble: null structure");
    if (ridge < 0) throw std::invalid_argument("assemble: negative ridge");
    CompressedKernelMatrix m;
    m.s_ = std::move(s);
    m.ridge_ = ridge;
    if constexpr (std::is_same_v<std::decay_t<Kernel>, KernelSpec>)
      m.kernel_spec_ = kernel;
    const H2Structure &st = *m.s_;
    m.stats_.structure_ms = st.build_ms;

    // unique representatives (a <= b) of the symmetric block lists
    for (const auto &[a, b] : st.partition.farfield)
      if (a <= b) m.far_blocks_.emplace_back(a, b);
    for (const auto &[a, b] : st.partition.nearfield)
      if (a <= b) m.near_blocks_.emplace_back(a, b);

    auto t0 = std::chrono::steady_clock::now();
    const Index n = st.scheme.rank();
    m.coupling_.resize(m.far_blocks_.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t bi = 0; bi < m.far_blocks_.size(); ++bi) {
      const auto [a, b] = m.far_blocks_[bi];
      const PointMatrix &xa = st.bases.mapped_nodes[a];
      const PointMatrix &xb = st.bases.mapped_nodes[b];
      Matrix S(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
          S(i, j) = kernel(xa.row(i).transpose(), xb.row(j).transpose());
      // C = V^{-1} S V^{-T}, via two solves with the same factorization
      Matrix C = st.scheme.lu.solve(S);
      m.coupling_[bi] = st.scheme.lu.solve(C.transpose()).transpose();
    }
    m.stats_.coupling_ms = internal::elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    m.nearfield_.resize(m.near_blocks_.size());
    const PointMatrix &pts = st.tree.points().coords;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t bi = 0; bi < m.near_blocks_.size(); ++bi) {
      const auto [a, b] = m.near_blocks_[bi];
      const Cluster &ca = st.tree.cluster(a);
      const Cluster &cb = st.tree.cluster(b);
      Matrix K(ca.size(), cb.size());
      for (Index i = 0; i < ca.size(); ++i)
        for (Index j = 0; j < cb.size(); ++j)
          K(i, j) = kernel(pts.row(ca.begin + i).transpose(),
                           pts.row(cb.begin + j).transpose());
      m.nearfield_[bi] = std::move(K);
    }
    m.stats_.nearfield_ms = internal::elapsed_ms(t0);

    m.build_application_lists();
    m.stats_.mem_floats = m.stored_floats();
    return m;
  }

  // (K~ + lambda I) x, three-phase nested-basis evaluation
  Vector apply(const Vector &x, Scalar lambda) const {
    const H2Structure &st = *s_;
    const Index N = st.size();
    if (x.size() != N)
      throw std::invalid_argument("matvec: length mismatch");
    const Index n = st.scheme.rank();
    const auto &clusters = st.tree.clusters();
    const Index m = st.tree.num_clusters();

    // upward: children precede parents in reverse pre-order
    Matrix xhat(n, m);
    for (Index id = m - 1; id >= 0; --id) {
      const Cluster &nu = clusters[id];
      if (nu.is_leaf())
        xhat.col(id).noalias() =
            st.bases.leaf_basis[id].transpose() * x.segment(nu.begin, nu.size());
      else
        xhat.col(id).noalias() =
            st.bases.transfer[nu.child[0]].transpose() * xhat.col(nu.child[0]) +
            st.bases.transfer[nu.child[1]].transpose() * xhat.col(nu.child[1]);
    }

    // coupling: blocks grouped by target cluster, disjoint outputs
    Matrix yhat = Matrix::Zero(n, m);
#pragma omp parallel for schedule(dynamic)
    for (Index t = 0; t < m; ++t)
      for (const auto &ap : far_apply_[t]) {
        const Matrix &C = coupling_[ap.block];
        if (ap.transposed)
          yhat.col(t).noalias() += C.transpose() * xhat.col(ap.source);
        else
          yhat.col(t).noalias() += C * xhat.col(ap.source);
      }

    // downward: parents precede children; leaves expand into output segments
    Vector y = Vector::Zero(N);
    for (Index id = 0; id < m; ++id) {
      const Cluster &nu = clusters[id];
      if (nu.is_leaf())
        y.segment(nu.begin, nu.size()).noalias() =
            st.bases.leaf_basis[id] * yhat.col(id);
      else {
        yhat.col(nu.child[0]).noalias() +=
            st.bases.transfer[nu.child[0]] * yhat.col(id);
        yhat.col(nu.child[1]).noalias() +=
            st.bases.transfer[nu.child[1]] * yhat.col(id);
      }
    }

    // nearfield, same disjoint-target grouping
#pragma omp parallel for schedule(dynamic)
    for (Index t = 0; t < m; ++t) {
      const Cluster &ct = clusters[t];
      for (const auto &ap : near_apply_[t]) {
        const Matrix &K = nearfield_[ap.block];
        const Cluster &cs = clusters[ap.source];
        if (ap.transposed)
          y.segment(ct.begin, ct.size()).noalias() +=
              K.transpose() * x.segment(cs.begin, cs.size());
        else
          y.segment(ct.begin, ct.size()).noalias() +=
              K * x.segment(cs.begin, cs.size());
      }
    }

    if (lambda != 0) y.noalias() += lambda * x;
    return y;
  }

  Vector matvec(const Vector &x) const { return apply(x, ridge_); }

  Index size() const { return s_->size(); }
  Scalar ridge() const { return ridge_; }
  const std::optional<KernelSpec> &kernel_spec() const { return kernel_spec_; }
  const H2Structure &structure() const { return *s_; }
  std::shared_ptr<const H2Structure> structure_ptr() const { return s_; }
  const AssemblyStats &stats() const { return stats_; }
  Index num_far_stored() const { return static_cast<Index>(far_blocks_.size()); }
  Index num_near_stored() const {
    return static_cast<Index>(near_blocks_.size());
  }

  // floats held in leaf bases, transfers, couplings and nearfield blocks
  std::uint64_t stored_floats() const {
    const H2Structure &st = *s_;
    std::uint64_t total = 0;
    for (const Matrix &p : st.bases.leaf_basis)
      total += std::uint64_t(p.rows()) * p.cols();
    for (const Matrix &t : st.bases.transfer)
      total += std::uint64_t(t.rows()) * t.cols();
    for (const Matrix &c : coupling_) total += std::uint64_t(c.rows()) * c.cols();
    for (const Matrix &k : nearfield_)
      total += std::uint64_t(k.rows()) * k.cols();
    return total;
  }
  std::uint64_t mem_bytes() const { return stored_floats() * sizeof(Scalar); }

 private:
  struct Application {
    Index source;
    std::size_t block;
    bool transposed;
  };

  void build_application_lists() {
    const Index m = s_->tree.num_clusters();
    far_apply_.assign(m, {});
    near_apply_.assign(m, {});
    for (std::size_t bi = 0; bi < far_blocks_.size(); ++bi) {
      const auto [a, b] = far_blocks_[bi];
      far_apply_[a].push_back({b, bi, false});
      if (a != b) far_apply_[b].push_back({a, bi, true});
    }
    for (std::size_t bi = 0; bi < near_blocks_.size(); ++bi) {
      const auto [a, b] = near_blocks_[bi];
      near_apply_[a].push_back({b, bi, false});
      if (a != b) near_apply_[b].push_back({a, bi, true});
    }
  }

  std::shared_ptr<const H2Structure> s_;
  std::vector<std::pair<Index, Index>> far_blocks_;   // a <= b
  std::vector<std::pair<Index, Index>> near_blocks_;  // a <= b
  std::vector<Matrix> coupling_;
  std::vector<Matrix> nearfield_;
  std::vector<std::vector<Application>> far_apply_;
  std::vector<std::vector<Application>> near_apply_;
  Scalar ridge_ = 0;
  std::optional<KernelSpec> kernel_spec_;
  AssemblyStats stats_;
};

// convenience pipeline: tree, partition, scheme, bases, then the matrix
template <typename Kernel>
CompressedKernelMatrix assemble(PointSet points, Kernel &&kernel,
                                const AnalyticityProfile &profile, Scalar q,
                                Index leaf_size = 0, Index candidate_count = 0,
                                std::uint64_t seed = 0, Scalar ridge = 0) {
  auto s = std::make_shared<H2Structure>(H2Structure::build(
      std::move(points), profile, q, leaf_size, candidate_count, seed));
  return CompressedKernelMatrix::assemble(std::move(s),
                                          std::forward<Kernel>(kernel), ridge);
}

struct CompressionError {
  Scalar error = 0;      // sqrt(sum ||k_j - k~_j||^2) / sqrt(sum ||k_j||^2)
  Vector per_column;     // relative error of each sampled column
};

// Frobenius-norm error over randomly sampled columns: exact column by direct
// kernel evaluation, compressed column by matvec with a unit vector (ridge
// suppressed for the comparison).
template <typename Kernel>
CompressionError compression_error_estimate(const CompressedKernelMatrix &M,
                                            Kernel &&kernel, Index ncols,
                                            std::uint64_t seed) {
  const Index N = M.size();
  if (ncols < 1 || ncols > N)
    throw std::invalid_argument("compression_error_estimate: bad ncols");
  Rng rng(seed);
  const std::vector<Index> cols = sample_without_replacement(rng, N, ncols);
  const PointMatrix &pts = M.structure().tree.points().coords;

  CompressionError result;
  result.per_column.resize(ncols);
  Scalar num = 0, den = 0;
  Vector unit = Vector::Zero(N);
  for (Index c = 0; c < ncols; ++c) {
    const Index j = cols[c];
    unit[j] = 1;
    const Vector approx = M.apply(unit, 0);
    unit[j] = 0;
    Vector exact(N);
    const auto xj = pts.row(j).transpose();
#pragma omp parallel for schedule(static)
    for (Index i = 0; i < N; ++i)
      exact[i] = kernel(pts.row(i).transpose(), xj);
    const Scalar diff2 = (approx - exact).squaredNorm();
    const Scalar norm2 = exact.squaredNorm();
    num += diff2;
    den += norm2;
    result.per_column[c] = std::sqrt(diff2 / norm2);
  }
  result.error = std::sqrt(num / den);
  return result;
}

}  // namespace dwfmm
