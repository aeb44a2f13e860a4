#pragma once

#include <cmath>
#include <stdexcept>

#include "types.hpp"

namespace dwfmm {

// Per-dimension analyticity data driving the weighted interpolation degree:
// dimension weights b (descending), analyticity parameters tau, convergence
// radii rho of the associated Bernstein ellipses on [0,1], and the
// interpolation weights omega = log(rho).
struct AnalyticityProfile {
  Vector b;      // empty when constructed from tau directly
  Vector tau;    // ascending, positive
  Vector rho;    // > 1
  Vector omega;  // = log(rho), ascending, >= 0
  double eta = 0.5;
  bool normalized = false;

  Index dim() const { return tau.size(); }
};

// radius of the largest ellipse with foci {0,1} inside which a function with
// analyticity parameter tau extends holomorphically
inline Scalar convergence_radius(Scalar tau) {
  return 2 * tau + std::sqrt(1 + 4 * tau * tau);
}

namespace internal {

inline AnalyticityProfile finish_profile(AnalyticityProfile p, bool normalize) {
  const Index d = p.tau.size();
  p.rho.resize(d);
  for (Index k = 0; k < d; ++k) p.rho[k] = convergence_radius(p.tau[k]);
  if (normalize) {
    // rescale so that omega_1 = 1 exactly: rho_k -> e * r_k / r_1
    const Scalar r1 = p.rho[0];
    for (Index k = 0; k < d; ++k)
      p.rho[k] = std::exp(Scalar(1)) * (p.rho[k] / r1);
  }
  p.omega = p.rho.array().log();
  if (normalize) p.omega[0] = 1;  // exact, not through log(exp(1))
  p.normalized = normalize;
  return p;
}

}  // namespace internal

inline AnalyticityProfile profile_from_dimension_weights(const Vector &b,
                                                         Scalar eta,
                                                         bool normalize) {
  const Index d = b.size();
  if (d == 0) throw std::invalid_argument("profile: empty weight vector");
  if (!(eta > 0)) throw std::invalid_argument("profile: eta must be positive");
  for (Index k = 0; k < d; ++k) {
    if (!(b[k] > 0))
      throw std::invalid_argument("profile: non-positive dimension weight");
    if (k > 0 && b[k] > b[k - 1])
      throw std::invalid_argument(
          "profile: dimension weights must be non-increasing; sort dimensions "
          "first");
  }
  AnalyticityProfile p;
  p.b = b;
  p.eta = eta;
  p.tau = (eta * b.array()).inverse();
  return internal::finish_profile(std::move(p), normalize);
}

inline AnalyticityProfile profile_from_tau(const Vector &tau, bool normalize,
                                           Scalar eta = 0.5) {
  const Index d = tau.size();
  if (d == 0) throw std::invalid_argument("profile: empty tau vector");
  for (Index k = 0; k < d; ++k) {
    if (!(tau[k] > 0))
      throw std::invalid_argument("profile: non-positive tau");
    if (k > 0 && tau[k] < tau[k - 1])
      throw std::invalid_argument("profile: tau must be non-decreasing");
  }
  AnalyticityProfile p;
  p.tau = tau;
  p.eta = eta;
  return internal::finish_profile(std::move(p), normalize);
}

// smallest leading dimension count whose relative l1 tail of b drops below tol
inline Index truncation_dimension(const Vector &b, Scalar tol) {
  const Index d = b.size();
  if (d == 0) throw std::invalid_argument("truncation_dimension: empty b");
  if (!(tol > 0 && tol < 1))
    throw std::invalid_argument("truncation_dimension: tol must be in (0,1)");
  for (Index k = 0; k < d; ++k) {
    // zeros are fine here: exactly inactive dimensions truncate for free
    if (!(b[k] >= 0))
      throw std::invalid_argument("truncation_dimension: negative weight");
    if (k > 0 && b[k] > b[k - 1])
      throw std::invalid_argument("truncation_dimension: b must be descending");
  }
  const Scalar total = b.sum();
  if (!(total > 0))
    throw std::invalid_argument("truncation_dimension: b must not be all zero");
  Scalar tail = total;
  for (Index dt = 1; dt <= d; ++dt) {
    tail -= b[dt - 1];
    if (tail / total <= tol) return dt;
  }
  return d;
}

}  // namespace dwfmm
