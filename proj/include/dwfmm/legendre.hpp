#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "index_set.hpp"
#include "types.hpp"

namespace dwfmm {

// slack for arguments that should lie in [0,1] but arrive through affine
// inverse maps
inline constexpr Scalar kUnitIntervalSlack = 1e-9;

// Values of the orthonormal shifted Legendre polynomials p0..p_max at x,
// normalized so that int_0^1 p_i p_j = delta_ij. Three-term recurrence in the
// orthonormal scaling:
//   p_{n+1} = sqrt(2n+3) * (sqrt(2n+1) t p_n - n/sqrt(2n-1) p_{n-1}) / (n+1)
// with t = 2x - 1.
inline void legendre_eval_all(int max_degree, Scalar x, Scalar *out) {
  if (x < -kUnitIntervalSlack || x > 1 + kUnitIntervalSlack)
    throw std::invalid_argument("legendre_eval_all: x outside [0,1]");
  const Scalar t = 2 * x - 1;
  out[0] = 1;
  if (max_degree == 0) return;
  out[1] = std::sqrt(Scalar(3)) * t;
  for (int n = 1; n < max_degree; ++n)
    out[n + 1] = std::sqrt(Scalar(2 * n + 3)) *
                 (std::sqrt(Scalar(2 * n + 1)) * t * out[n] -
                  n / std::sqrt(Scalar(2 * n - 1)) * out[n - 1]) /
                 (n + 1);
}

inline Vector legendre_eval_all(int max_degree, Scalar x) {
  if (max_degree < 0)
    throw std::invalid_argument("legendre_eval_all: negative degree");
  Vector v(max_degree + 1);
  legendre_eval_all(max_degree, x, v.data());
  return v;
}

// workspace holding per-dimension univariate values so tensorized basis
// evaluations share them
class TensorBasisEvaluator {
 public:
  explicit TensorBasisEvaluator(const WeightedIndexSet &set)
      : set_(&set), univariate_(set.d) {
    for (Index k = 0; k < set.d; ++k)
      univariate_[k].resize(set.max_degree[k] + 1);
  }

  // values of all tensor basis functions p_alpha, alpha in Lambda, at x
  template <typename Derived>
  void eval(const Eigen::MatrixBase<Derived> &x, Scalar *out) {
    const Index d = set_->d;
    for (Index k = 0; k < d; ++k)
      legendre_eval_all(set_->max_degree[k], x[k], univariate_[k].data());
    const Index n = set_->size();
    for (Index j = 0; j < n; ++j) {
      const MultiIndex &alpha = set_->indices[j];
      Scalar prod = 1;
      for (Index k = 0; k < d; ++k) prod *= univariate_[k][alpha[k]];
      out[j] = prod;
    }
  }

 private:
  const WeightedIndexSet *set_;
  std::vector<Vector> univariate_;
};

template <typename Derived>
Vector tensor_eval(const WeightedIndexSet &set,
                   const Eigen::MatrixBase<Derived> &x) {
  if (x.size() != set.d)
    throw std::invalid_argument("tensor_eval: dimension mismatch");
  TensorBasisEvaluator ev(set);
  Vector out(set.size());
  ev.eval(x, out.data());
  return out;
}

// one basis-evaluation row per input point
inline Matrix tensor_eval_rows(const WeightedIndexSet &set,
                               const PointMatrix &points) {
  if (points.cols() != set.d)
    throw std::invalid_argument("tensor_eval_rows: dimension mismatch");
  Matrix out(points.rows(), set.size());
#pragma omp parallel
  {
    TensorBasisEvaluator ev(set);
    Vector row(set.size());
#pragma omp for schedule(static)
    for (Index i = 0; i < points.rows(); ++i) {
      ev.eval(points.row(i).transpose(), row.data());
      out.row(i) = row;
    }
  }
  return out;
}

}  // namespace dwfmm
