#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "types.hpp"

namespace dwfmm {

enum class KernelFamily { exponential, gaussian, inverse_multiquadric };

inline KernelFamily kernel_family_from_string(const std::string &name) {
  if (name == "exponential") return KernelFamily::exponential;
  if (name == "gaussian") return KernelFamily::gaussian;
  if (name == "inverse_multiquadric") return KernelFamily::inverse_multiquadric;
  throw std::invalid_argument("unknown kernel family: " + name);
}

inline std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::exponential: return "exponential";
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::inverse_multiquadric: return "inverse_multiquadric";
  }
  return "?";
}

// Radial kernel with a pluggable family. All families are unit on the
// diagonal and strictly decreasing in the distance.
struct KernelSpec {
  KernelFamily family = KernelFamily::exponential;
  Scalar sigma = 1;
  // asymptotic-smoothness constants, informational only
  std::optional<std::pair<Scalar, Scalar>> smoothness;

  void validate() const {
    if (!(sigma > 0)) throw std::invalid_argument("kernel: sigma must be > 0");
  }

  Scalar from_squared_distance(Scalar r2) const {
    switch (family) {
      case KernelFamily::exponential:
        return std::exp(-std::sqrt(r2) / sigma);
      case KernelFamily::gaussian:
        return std::exp(-r2 / (sigma * sigma));
      case KernelFamily::inverse_multiquadric:
        return Scalar(1) / std::sqrt(1 + r2 / (sigma * sigma));
    }
    return 0;
  }

  template <typename DerivedX, typename DerivedY>
  Scalar operator()(const Eigen::MatrixBase<DerivedX> &x,
                    const Eigen::MatrixBase<DerivedY> &y) const {
    return from_squared_distance((x - y).squaredNorm());
  }
};

template <typename DerivedX, typename DerivedY>
Scalar kernel_eval(const KernelSpec &spec, const Eigen::MatrixBase<DerivedX> &x,
                   const Eigen::MatrixBase<DerivedY> &y) {
  if (x.size() != y.size())
    throw std::invalid_argument("kernel_eval: dimension mismatch");
  spec.validate();
  return spec(x, y);
}

// kernel transported to the unit cube by the diagonal scaling B = diag(b)
template <typename DerivedX, typename DerivedY>
Scalar transported_eval(const KernelSpec &spec, const Vector &b,
                        const Eigen::MatrixBase<DerivedX> &xhat,
                        const Eigen::MatrixBase<DerivedY> &yhat) {
  spec.validate();
  Scalar r2 = 0;
  for (Index k = 0; k < b.size(); ++k) {
    const Scalar t = b[k] * (xhat[k] - yhat[k]);
    r2 += t * t;
  }
  return spec.from_squared_distance(r2);
}

}  // namespace dwfmm
