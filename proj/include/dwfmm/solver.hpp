#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "h2_matrix.hpp"
#include "kernel.hpp"

namespace dwfmm {

struct RidgeModel {
  Vector alpha;  // coefficients in tree ordering
  Scalar lambda = 0;
  std::optional<KernelSpec> kernel;
  std::shared_ptr<const H2Structure> structure;  // training points + permutation
  Index iterations = 0;
  Scalar residual = 0;  // true relative residual ||(K~+lambda I)a - y|| / ||y||
  bool converged = false;
  bool indefinite = false;  // hit non-positive curvature (compression error
                            // exceeded lambda)

  const PointSet &training() const { return structure->tree.points(); }

  // coefficients permuted back to the input point order
  Vector alpha_original_order() const {
    const auto &perm = training().permutation;
    Vector out(alpha.size());
    for (Index i = 0; i < alpha.size(); ++i) out[perm[i]] = alpha[i];
    return out;
  }
};

// Plain conjugate gradients on K~ + lambda I from a zero start, stopping at
// ||r|| / ||y|| <= tol. The recurrence residual is not monotone in finite
// precision (only the error's A-norm is), and on ill-conditioned systems it
// oscillates by large factors, so the safeguard is deliberately loose: a
// spike beyond 100x the best residual seen triggers a true-residual restart,
// and only persistent spiking without progress gives up. Non-positive
// curvature means the compressed operator is not positive definite at this
// lambda; the solve stops and flags it instead of throwing so that grid
// sweeps survive hostile cells.
inline RidgeModel cg_solve(const CompressedKernelMatrix &M, const Vector &y,
                           Scalar lambda, Scalar tol = 1e-6,
                           Index max_iter = 0) {
  const Index N = M.size();
  if (y.size() != N) throw std::invalid_argument("cg_solve: length mismatch");
  if (lambda < 0) throw std::invalid_argument("cg_solve: negative lambda");
  if (max_iter <= 0) max_iter = N;

  RidgeModel model;
  model.lambda = lambda;
  model.kernel = M.kernel_spec();
  model.structure = M.structure_ptr();
  model.alpha = Vector::Zero(N);

  const Scalar ynorm = y.norm();
  if (ynorm == 0) {
    model.converged = true;
    return model;
  }

  Vector r = y;
  Vector p = r;
  Scalar rs = r.squaredNorm();
  Scalar best = std::sqrt(rs) / ynorm;
  Scalar best_at_last_restart = best;
  int stagnant_restarts = 0;

  for (Index it = 1; it <= max_iter; ++it) {
    const Vector Ap = M.apply(p, lambda);
    const Scalar pAp = p.dot(Ap);
    if (!std::isfinite(pAp))
      throw std::runtime_error("cg_solve: non-finite curvature");
    if (pAp <= 0) {
      model.indefinite = true;
      model.iterations = it;
      break;
    }
    const Scalar a = rs / pAp;
    model.alpha.noalias() += a * p;
    r.noalias() -= a * Ap;
    const Scalar rs_new = r.squaredNorm();
    const Scalar rel = std::sqrt(rs_new) / ynorm;
    if (!std::isfinite(rel))
      throw std::runtime_error("cg_solve: non-finite residual");
    model.iterations = it;
    if (rel <= tol) break;
    if (rel > 100 * best) {
      if (best < best_at_last_restart)
        stagnant_restarts = 0;  // progress since the previous restart
      else if (++stagnant_restarts > 5)
        break;  // spiking without progress, give up flagged non-converged
      best_at_last_restart = best;
      r = y - M.apply(model.alpha, lambda);
      p = r;
      rs = r.squaredNorm();
      best = std::min(best, std::sqrt(rs) / ynorm);
      continue;
    }
    best = std::min(best, rel);
    p = r + (rs_new / rs) * p;
    rs = rs_new;
  }

  model.residual = (M.apply(model.alpha, lambda) - y).norm() / ynorm;
  model.converged = model.residual <= tol;
  return model;
}

// s(x) = sum_j alpha_j kappa(x_j, x), direct evaluation against the
// tree-ordered training points
inline Vector predict(const RidgeModel &model, const PointSet &test) {
  if (!model.kernel)
    throw std::invalid_argument("predict: model carries no kernel spec");
  const PointSet &train = model.training();
  if (test.dim() != train.dim())
    throw std::invalid_argument("predict: dimension mismatch");
  const KernelSpec kernel = *model.kernel;
  Vector pred(test.size());
#pragma omp parallel for schedule(static)
  for (Index t = 0; t < test.size(); ++t) {
    Scalar s = 0;
    const auto xt = test.coords.row(t).transpose();
    for (Index j = 0; j < train.size(); ++j)
      s += model.alpha[j] * kernel(train.coords.row(j).transpose(), xt);
    pred[t] = s;
  }
  return pred;
}

inline Scalar prediction_error(const Vector &pred, const Vector &truth) {
  if (pred.size() != truth.size())
    throw std::invalid_argument("prediction_error: length mismatch");
  const Scalar tn = truth.norm();
  if (tn == 0) throw std::invalid_argument("prediction_error: zero truth");
  return (pred - truth).norm() / tn;
}

// lo ... hi in `count` logarithmically equispaced steps, endpoints exact
inline std::vector<Scalar> log_grid(Scalar lo, Scalar hi, Index count) {
  if (!(lo > 0) || !(hi >= lo) || count < 1)
    throw std::invalid_argument("log_grid: need 0 < lo <= hi and count >= 1");
  std::vector<Scalar> grid(count);
  grid.front() = lo;
  if (count == 1) return grid;
  const Scalar step = std::log(hi / lo) / Scalar(count - 1);
  for (Index k = 1; k + 1 < count; ++k) grid[k] = lo * std::exp(step * k);
  grid.back() = hi;
  return grid;
}

struct GridSpec {
  std::vector<Scalar> sigmas;
  std::vector<Scalar> lambdas;
  KernelFamily family = KernelFamily::exponential;
  Scalar q = 8;
  Index leaf_size = 0;        // 0: max(32, 2 n_Lambda)
  Index candidate_count = 0;  // 0: 20 n_Lambda
  std::uint64_t seed = 0;
  Index repetitions = 5;
  Index ce_columns = 100;
  Index pe_samples = 1000;
  Scalar cg_tol = 1e-6;
  Index max_iter = 0;  // 0: N
};

struct GridRow {
  Scalar sigma = 0, lambda = 0;
  Scalar pe_mean = 0, pe_std = 0;
  Scalar ce_mean = 0, ce_std = 0;
  Index cg_iters = 0;
  double wall_ms = 0;
  bool converged = false;  // not part of the CSV row format
};

namespace internal {
inline std::pair<Scalar, Scalar> mean_std(const std::vector<Scalar> &v) {
  const Index n = static_cast<Index>(v.size());
  Scalar mean = 0;
  for (Scalar x : v) mean += x;
  mean /= n;
  Scalar var = 0;
  for (Scalar x : v) var += (x - mean) * (x - mean);
  return {mean, n > 1 ? std::sqrt(var / (n - 1)) : 0};
}

inline std::uint64_t rep_seed(std::uint64_t base, Index rep) {
  return base ^ (0x9e3779b97f4a7c15ull * (rep + 1));
}
}  // namespace internal

// Full hyperparameter sweep of the regression experiment. The tree,
// partition, scheme and bases are built once and reused for every sigma; each
// assembled matrix serves its whole lambda column. The compression error
// depends on sigma only and is computed once per sigma.
inline std::vector<GridRow> hyperparameter_grid(
    PointSet train, const Vector &y, const PointSet &test,
    const Vector &y_test, const AnalyticityProfile &profile,
    const GridSpec &spec) {
  if (y.size() != train.size() || y_test.size() != test.size())
    throw std::invalid_argument("hyperparameter_grid: value length mismatch");
  if (spec.sigmas.empty() || spec.lambdas.empty())
    throw std::invalid_argument("hyperparameter_grid: empty grid");
  if (spec.repetitions < 1)
    throw std::invalid_argument("hyperparameter_grid: need repetitions >= 1");

  auto structure = std::make_shared<const H2Structure>(
      H2Structure::build(std::move(train), profile, spec.q, spec.leaf_size,
                         spec.candidate_count, spec.seed));
  // target values follow the tree reordering of the training points
  const auto &perm = structure->tree.points().permutation;
  Vector y_tree(y.size());
  for (Index i = 0; i < y.size(); ++i) y_tree[i] = y[perm[i]];

  std::vector<GridRow> rows;
  rows.reserve(spec.sigmas.size() * spec.lambdas.size());
  for (const Scalar sigma : spec.sigmas) {
    KernelSpec kernel{spec.family, sigma};
    const auto M = CompressedKernelMatrix::assemble(structure, kernel);

    std::vector<Scalar> ce(spec.repetitions);
    for (Index rep = 0; rep < spec.repetitions; ++rep)
      ce[rep] = compression_error_estimate(
                    M, kernel, std::min(spec.ce_columns, M.size()),
                    internal::rep_seed(spec.seed, rep))
                    .error;
    const auto [ce_mean, ce_std] = internal::mean_std(ce);

    for (const Scalar lambda : spec.lambdas) {
      const auto t0 = std::chrono::steady_clock::now();
      const RidgeModel model =
          cg_solve(M, y_tree, lambda, spec.cg_tol, spec.max_iter);
      const Vector pred = predict(model, test);
      const double wall = internal::elapsed_ms(t0);

      std::vector<Scalar> pe(spec.repetitions);
      for (Index rep = 0; rep < spec.repetitions; ++rep) {
        if (spec.pe_samples >= test.size()) {
          pe[rep] = prediction_error(pred, y_test);
        } else {
          Rng rng(internal::rep_seed(spec.seed * 31 + 17, rep));
          const auto idx =
              sample_without_replacement(rng, test.size(), spec.pe_samples);
          Vector p(spec.pe_samples), t(spec.pe_samples);
          for (Index i = 0; i < spec.pe_samples; ++i) {
            p[i] = pred[idx[i]];
            t[i] = y_test[idx[i]];
          }
          pe[rep] = prediction_error(p, t);
        }
      }
      const auto [pe_mean, pe_std] = internal::mean_std(pe);
      rows.push_back({sigma, lambda, pe_mean, pe_std, ce_mean, ce_std,
                      model.iterations, wall, model.converged});
    }
  }
  return rows;
}

}  // namespace dwfmm
