#pragma once

// Oracle helpers shared by the unit and acceptance tests. Everything here is
// computed by a route independent of the library code under test: Pascal's
// triangle instead of factorial ratios, Gram-Schmidt instead of the
// three-term recurrence, direct dense assembly instead of the block
// structure.

#include <boost/math/quadrature/gauss.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <vector>

#include <dwfmm/dwfmm.hpp>

namespace testsupport {

using dwfmm::Index;
using dwfmm::Matrix;
using dwfmm::PointMatrix;
using dwfmm::PointSet;
using dwfmm::Scalar;
using dwfmm::Vector;

// binomial C(q+d, d) from Pascal's triangle, no factorials involved
inline boost::multiprecision::cpp_int pascal_tdi(int q, int d) {
  const int rows = q + d + 1;
  std::vector<std::vector<boost::multiprecision::cpp_int>> tri(rows);
  for (int i = 0; i < rows; ++i) {
    tri[i].resize(i + 1, 1);
    for (int j = 1; j < i; ++j) tri[i][j] = tri[i - 1][j - 1] + tri[i - 1][j];
  }
  return tri[q + d][d];
}

// shifted Legendre recurrence without the domain guard; polynomials extend to
// all of R, which the transported-kernel oracles need
inline Vector legendre_any(int max_degree, Scalar x) {
  Vector out(max_degree + 1);
  out[0] = 1;
  if (max_degree == 0) return out;
  const Scalar t = 2 * x - 1;
  out[1] = std::sqrt(3.0) * t;
  for (int n = 1; n < max_degree; ++n)
    out[n + 1] = std::sqrt(2.0 * n + 3) *
                 (std::sqrt(2.0 * n + 1) * t * out[n] -
                  n / std::sqrt(2.0 * n - 1) * out[n - 1]) /
                 (n + 1);
  return out;
}

// tensor basis value over an index set at an arbitrary (not necessarily
// unit-cube) point
inline Scalar tensor_any(const dwfmm::WeightedIndexSet &set, Index j,
                         const Vector &x) {
  Scalar v = 1;
  for (Index k = 0; k < set.d; ++k) {
    const int deg = set.indices[j][k];
    if (deg > 0) v *= legendre_any(deg, x[k])[deg];
  }
  return v;
}

// Orthonormal-polynomial coefficients on [0,1] built by modified
// Gram-Schmidt over the monomials, with the exact inner products
// <x^i, x^j> = 1/(i+j+1). Long double keeps the Hilbert-matrix conditioning
// in check up to degree ~6. Returns monomial coefficients, row per degree.
inline std::vector<std::vector<long double>> gram_schmidt_legendre(
    int max_degree) {
  const int m = max_degree + 1;
  auto dot = [](const std::vector<long double> &a,
                const std::vector<long double> &b) {
    long double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j)
        s += a[i] * b[j] / (long double)(i + j + 1);
    return s;
  };
  std::vector<std::vector<long double>> u;
  for (int i = 0; i < m; ++i) {
    std::vector<long double> v(i + 1, 0);
    v[i] = 1;
    for (int j = 0; j < i; ++j) {
      const long double c = dot(v, u[j]);
      for (std::size_t k = 0; k < u[j].size(); ++k) v[k] -= c * u[j][k];
    }
    const long double norm = std::sqrt(dot(v, v));
    for (auto &c : v) c /= norm;
    if (v[i] < 0)
      for (auto &c : v) c = -c;  // positive leading coefficient
    u.push_back(std::move(v));
  }
  return u;
}

inline long double eval_monomial(const std::vector<long double> &coeffs,
                                 long double x) {
  long double v = 0;
  for (std::size_t i = coeffs.size(); i-- > 0;) v = v * x + coeffs[i];
  return v;
}

template <typename F>
Scalar integrate01(F &&f) {
  return boost::math::quadrature::gauss<Scalar, 64>::integrate(
      std::forward<F>(f), Scalar(0), Scalar(1));
}

// uniform cloud in the anisotropic box prod_k [0, scale_k]
inline PointSet scaled_cloud(Index n, const Vector &scale, std::uint64_t seed) {
  dwfmm::Rng rng(seed);
  PointMatrix c(n, scale.size());
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < scale.size(); ++k) c(i, k) = rng.uniform() * scale[k];
  return PointSet::from_coords(std::move(c));
}

inline PointSet unit_cloud(Index n, Index d, std::uint64_t seed) {
  return scaled_cloud(n, Vector::Ones(d), seed);
}

template <typename Kernel>
Matrix dense_kernel(const PointSet &points, Kernel &&kernel) {
  const Index n = points.size();
  Matrix K(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      K(i, j) = kernel(points.coords.row(i).transpose(),
                       points.coords.row(j).transpose());
  return K;
}

// largest singular value of a symmetric operator given only its matvec
template <typename Apply>
Scalar power_iteration(Apply &&apply, Index n, int iters,
                       std::uint64_t seed = 123) {
  dwfmm::Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1, 1);
  v /= v.norm();
  Scalar lambda = 0;
  for (int it = 0; it < iters; ++it) {
    Vector w = apply(v);
    lambda = w.norm();
    if (lambda == 0) return 0;
    v = w / lambda;
  }
  return lambda;
}

}  // namespace testsupport
