#include <catch2/catch_amalgamated.hpp>
#include <dwfmm/experiment.hpp>
#include <dwfmm/solver.hpp>
#include <memory>

#include "support.hpp"

using namespace dwfmm;
using testsupport::dense_kernel;
using testsupport::scaled_cloud;

namespace {

AnalyticityProfile quadratic_profile(Index d) {
  Vector b(d);
  for (Index k = 0; k < d; ++k) b[k] = 1.0 / Scalar((k + 1) * (k + 1));
  return profile_from_dimension_weights(b, 0.5, true);
}

PointSet anisotropic_cloud(Index n, Index d, std::uint64_t seed) {
  Vector scale(d);
  for (Index k = 0; k < d; ++k) scale[k] = 1.0 / Scalar((k + 1) * (k + 1));
  return scaled_cloud(n, scale, seed);
}

CompressedKernelMatrix ridge_only_matrix(Index n) {
  auto structure = std::make_shared<const H2Structure>(H2Structure::build(
      anisotropic_cloud(n, 2, 71), quadratic_profile(2), 2, 16));
  return CompressedKernelMatrix::assemble(
      structure, [](const auto &, const auto &) { return 0.0; });
}

Vector random_vector(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Vector v(n);
  for (Index i = 0; i < n; ++i) v[i] = rng.uniform(-1, 1);
  return v;
}

}  // namespace

TEST_CASE("a pure ridge system solves in one iteration", "[solver]") {
  const auto M = ridge_only_matrix(50);
  const Vector y = random_vector(50, 1);
  const auto model = cg_solve(M, y, 2.0);
  REQUIRE(model.iterations == 1);
  REQUIRE(model.converged);
  REQUIRE((model.alpha - y / 2.0).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("a zero right-hand side returns immediately", "[solver]") {
  const auto M = ridge_only_matrix(30);
  const auto model = cg_solve(M, Vector::Zero(30), 0.5);
  REQUIRE(model.iterations == 0);
  REQUIRE(model.converged);
  REQUIRE(model.alpha.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("solver input checks", "[solver]") {
  const auto M = ridge_only_matrix(30);
  REQUIRE_THROWS_AS(cg_solve(M, Vector::Zero(29), 1.0), std::invalid_argument);
  REQUIRE_THROWS_AS(cg_solve(M, Vector::Zero(30), -1.0), std::invalid_argument);
}

TEST_CASE("cg agrees with a dense factorization", "[solver]") {
  // dense-exact regime: one nearfield block, so the operator equals K + l I
  const PointSet points = anisotropic_cloud(300, 3, 73);
  const KernelSpec kernel{KernelFamily::exponential, 0.5};
  const auto M =
      assemble(points, kernel, quadratic_profile(3), 4, /*leaf_size=*/512);
  const Matrix K = dense_kernel(M.structure().tree.points(), kernel);
  const Vector y = random_vector(300, 2);

  for (const Scalar lambda : {1e-1, 1e-3}) {
    const auto model = cg_solve(M, y, lambda, 1e-12, 5000);
    const Matrix A = K + lambda * Matrix::Identity(300, 300);
    const Vector direct = Eigen::LDLT<Matrix>(A).solve(y);
    REQUIRE((model.alpha - direct).norm() <= 1e-5 * direct.norm());
    REQUIRE(model.converged);
    REQUIRE(model.residual <= 1e-12);
    REQUIRE_FALSE(model.indefinite);
  }
}

TEST_CASE("converged models satisfy their reported residual", "[solver]") {
  const PointSet points = anisotropic_cloud(400, 3, 79);
  const KernelSpec kernel{KernelFamily::exponential, 0.4};
  // q = 8 keeps the compression error below lambda, so the shifted operator
  // stays positive definite
  const auto M = assemble(points, kernel, quadratic_profile(3), 8);
  const Vector y = random_vector(400, 3);
  const auto model = cg_solve(M, y, 1e-2, 1e-8);
  REQUIRE(model.converged);
  const Vector r = M.apply(model.alpha, 1e-2) - y;
  REQUIRE(r.norm() / y.norm() <= 1e-8);
  REQUIRE_THAT(model.residual,
               Catch::Matchers::WithinAbs(r.norm() / y.norm(), 1e-15));
}

TEST_CASE("coefficients can be mapped back to input order", "[solver]") {
  const PointSet points = anisotropic_cloud(120, 2, 83);
  const KernelSpec kernel{KernelFamily::exponential, 0.5};
  const auto M = assemble(points, kernel, quadratic_profile(2), 3);
  const auto model = cg_solve(M, random_vector(120, 4), 1e-1, 1e-10);
  const Vector original = model.alpha_original_order();
  const auto &perm = model.training().permutation;
  for (Index i = 0; i < 120; ++i)
    REQUIRE(original[perm[i]] == model.alpha[i]);
}

TEST_CASE("predictions follow the kernel expansion", "[solver]") {
  const PointSet points = anisotropic_cloud(150, 2, 89);
  const KernelSpec kernel{KernelFamily::exponential, 0.5};
  const auto M = assemble(points, kernel, quadratic_profile(2), 3);

  RidgeModel model;
  model.kernel = kernel;
  model.structure = M.structure_ptr();
  model.alpha = Vector::Zero(150);
  model.alpha[7] = 1.0;  // unit coefficient: prediction is one kernel slice

  const PointSet test = anisotropic_cloud(40, 2, 97);
  const Vector pred = predict(model, test);
  const auto &train = model.training();
  for (Index i = 0; i < 40; ++i)
    REQUIRE(pred[i] == kernel_eval(kernel, train.coords.row(7).transpose(),
                                   test.coords.row(i).transpose()));

  model.alpha = random_vector(150, 5);
  const Vector base = predict(model, test);
  model.alpha *= -2.5;
  REQUIRE((predict(model, test) + 2.5 * base).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("interpolation at training points with vanishing ridge", "[solver]") {
  const PointSet points = anisotropic_cloud(200, 2, 101);
  const KernelSpec kernel{KernelFamily::exponential, 0.8};
  // dense-exact so the fitted operator is the true kernel matrix
  const auto M = assemble(points, kernel, quadratic_profile(2), 3, 256);
  const Vector y = random_vector(200, 6);
  const auto model = cg_solve(M, y, 0.0, 1e-12, 10000);
  const Vector back = predict(model, model.training());
  REQUIRE((back - y).norm() <= 1e-5 * y.norm());
}

TEST_CASE("relative prediction error on pinned vectors", "[solver]") {
  Vector truth(3);
  truth << 3, 0, 4;
  REQUIRE(prediction_error(truth, truth) == 0.0);
  REQUIRE(prediction_error(Vector::Zero(3), truth) == 1.0);
  REQUIRE_THAT(prediction_error(1.1 * truth, truth),
               Catch::Matchers::WithinAbs(0.1, 1e-14));
  REQUIRE_THROWS_AS(prediction_error(truth, Vector::Zero(3)),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(prediction_error(Vector::Zero(2), truth),
                    std::invalid_argument);
}

TEST_CASE("logarithmic grids hit both endpoints", "[solver]") {
  const auto grid = log_grid(1e-6, 1e-1, 15);
  REQUIRE(grid.size() == 15);
  REQUIRE(grid.front() == 1e-6);
  REQUIRE(grid.back() == 1e-1);
  const Scalar ratio = grid[1] / grid[0];
  for (std::size_t i = 2; i < grid.size(); ++i)
    REQUIRE_THAT(grid[i] / grid[i - 1],
                 Catch::Matchers::WithinRel(ratio, 1e-12));
  REQUIRE(log_grid(0.5, 2.0, 1).size() == 1);
  REQUIRE_THROWS_AS(log_grid(-1.0, 1.0, 3), std::invalid_argument);
  REQUIRE_THROWS_AS(log_grid(2.0, 1.0, 3), std::invalid_argument);
}

TEST_CASE("the hyperparameter sweep reports a full grid", "[solver]") {
  const PointSet train = anisotropic_cloud(350, 3, 103);
  const PointSet test = anisotropic_cloud(60, 3, 107);
  Vector y(350), y_test(60);
  for (Index i = 0; i < 350; ++i)
    y[i] = target_value(train.coords.row(i).norm());
  for (Index i = 0; i < 60; ++i)
    y_test[i] = target_value(test.coords.row(i).norm());

  GridSpec spec;
  spec.sigmas = {0.1, 0.3};
  spec.lambdas = {1e-2, 1e-1};
  spec.q = 4;
  spec.repetitions = 2;
  spec.ce_columns = 20;
  spec.pe_samples = 30;
  spec.cg_tol = 1e-8;

  const auto rows = hyperparameter_grid(train, y, test, y_test,
                                        quadratic_profile(3), spec);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].sigma == spec.sigmas[i / 2]);
    REQUIRE(rows[i].lambda == spec.lambdas[i % 2]);
    REQUIRE(std::isfinite(rows[i].pe_mean));
    REQUIRE(rows[i].pe_mean >= 0.0);
    REQUIRE(rows[i].pe_std >= 0.0);
    REQUIRE(rows[i].ce_mean >= 0.0);
    REQUIRE(rows[i].cg_iters >= 1);
    REQUIRE(rows[i].wall_ms >= 0.0);
  }
  // compression error depends on sigma only
  REQUIRE(rows[0].ce_mean == rows[1].ce_mean);
  REQUIRE(rows[2].ce_mean == rows[3].ce_mean);

  const auto again = hyperparameter_grid(train, y, test, y_test,
                                         quadratic_profile(3), spec);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    REQUIRE(rows[i].pe_mean == again[i].pe_mean);
    REQUIRE(rows[i].ce_mean == again[i].ce_mean);
  }

  GridSpec single;
  single.sigmas = {0.2};
  single.lambdas = {1e-2};
  single.repetitions = 1;
  single.q = 3;
  single.ce_columns = 10;
  REQUIRE(hyperparameter_grid(train, y, test, y_test, quadratic_profile(3),
                              single)
              .size() == 1);
}
