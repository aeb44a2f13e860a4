#pragma once

#include <cmath>
#include <cstdint>
#include <json.hpp>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "h2_matrix.hpp"
#include "io.hpp"
#include "rng.hpp"
#include "solver.hpp"
#include "weights.hpp"

namespace dwfmm {

// sin(4 pi |x|) / (8 pi |x|) with the removable singularity filled by the
// limit 1/2
inline Scalar target_value(Scalar norm) {
  const Scalar t = 4 * std::numbers::pi_v<Scalar> * norm;
  return t == 0 ? Scalar(0.5) : std::sin(t) / (2 * t);
}

// Benchmark data: uniform samples in the unit cube rescaled per dimension by
// b_k = k^{-r}, labeled by the radial sinc target.
inline LabeledPoints generate_data(Index n, Index d, Scalar r,
                                   std::uint64_t seed) {
  if (n < 1 || d < 1)
    throw std::invalid_argument("generate_data: need n, d >= 1");
  if (!(r > 0)) throw std::invalid_argument("generate_data: need r > 0");
  Rng rng(seed);
  PointMatrix coords(n, d);
  Vector scale(d);
  for (Index k = 0; k < d; ++k) scale[k] = std::pow(Scalar(k + 1), -r);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < d; ++k) coords(i, k) = rng.uniform() * scale[k];

  LabeledPoints data;
  data.points = PointSet::from_coords(std::move(coords));
  Vector y(n);
  for (Index i = 0; i < n; ++i)
    y[i] = target_value(data.points.coords.row(i).norm());
  data.values = std::move(y);
  return data;
}

inline Vector dimension_weights(Index d, Scalar r) {
  Vector b(d);
  for (Index k = 0; k < d; ++k) b[k] = std::pow(Scalar(k + 1), -r);
  return b;
}

// deterministic held-out split: `fraction` of the rows become the test set
inline std::pair<LabeledPoints, LabeledPoints> split_data(
    const LabeledPoints &data, Scalar fraction, std::uint64_t seed) {
  const Index n = data.points.size();
  const Index n_test = static_cast<Index>(std::round(fraction * n));
  if (n_test < 1 || n_test >= n)
    throw std::invalid_argument("split_data: fraction leaves an empty side");
  Rng rng(seed);
  const auto test_idx = sample_without_replacement(rng, n, n_test);
  std::vector<bool> in_test(n, false);
  for (Index i : test_idx) in_test[i] = true;

  const Index d = data.points.dim();
  auto take = [&](bool pick_test, Index count) {
    LabeledPoints out;
    PointMatrix coords(count, d);
    Vector values(count);
    std::vector<Index> provenance(count);
    Index row = 0;
    for (Index i = 0; i < n; ++i) {
      if (in_test[i] != pick_test) continue;
      coords.row(row) = data.points.coords.row(i);
      provenance[row] = data.points.permutation[i];
      if (data.values) values[row] = (*data.values)[i];
      ++row;
    }
    out.points = PointSet::from_coords(std::move(coords));
    out.points.permutation = std::move(provenance);
    if (data.values) out.values = std::move(values);
    return out;
  };
  return {take(false, n - n_test), take(true, n_test)};
}

// Interpolation point counts for the weighted sets against the tensor-product
// and unweighted total-degree baselines, tau_k = k^r, both weight
// conventions. One CSV row per (d, q) pair.
inline std::string counts_table(Index d_max, Index q_max, Scalar r) {
  if (d_max < 1 || q_max < 0 || !(r > 0))
    throw std::invalid_argument("counts_table: bad grid parameters");
  std::ostringstream out;
  out << "d,q,tpi,tdi,wtdi_normalized,wtdi_raw\n";
  for (Index d = 1; d <= d_max; ++d) {
    Vector tau(d);
    for (Index k = 0; k < d; ++k) tau[k] = std::pow(Scalar(k + 1), r);
    const AnalyticityProfile raw = profile_from_tau(tau, false);
    const AnalyticityProfile normalized = profile_from_tau(tau, true);
    for (Index q = 0; q <= q_max; ++q) {
      out << d << "," << q << "," << tpi_count(q, d).str() << ","
          << tdi_count(q, d).str() << ","
          << enumerate_index_set(normalized.omega, q).size() << ","
          << enumerate_index_set(raw.omega, q).size() << "\n";
    }
  }
  return out.str();
}

struct BenchReport {
  Index n = 0;
  Scalar q = 0;
  double assembly_ms = 0;
  double compressed_matvec_ms = 0;
  double dense_build_ms = 0;
  double dense_matvec_ms = 0;
  Scalar rel_error = -1;  // -1 when the dense oracle was skipped
  bool dense_skipped = false;
  std::uint64_t mem_bytes = 0;
};

inline constexpr Index kDenseOracleLimit = 5000;

// Compressed vs dense matvec on the same tree-ordered points. The dense side
// is skipped (with a flag) above the oracle size limit.
inline BenchReport bench_matvec(const PointSet &points,
                                const AnalyticityProfile &profile, Scalar q,
                                const KernelSpec &kernel, Index leaf_size = 0,
                                std::uint64_t seed = 0) {
  BenchReport report;
  report.n = points.size();
  report.q = q;

  auto t0 = std::chrono::steady_clock::now();
  const CompressedKernelMatrix M =
      assemble(points, kernel, profile, q, leaf_size, 0, seed);
  report.assembly_ms = internal::elapsed_ms(t0);
  report.mem_bytes = M.mem_bytes();

  Rng rng(seed);
  Vector x(points.size());
  for (Index i = 0; i < x.size(); ++i) x[i] = rng.uniform(-1, 1);

  t0 = std::chrono::steady_clock::now();
  const Vector y_fast = M.apply(x, 0);
  report.compressed_matvec_ms = internal::elapsed_ms(t0);

  if (points.size() > kDenseOracleLimit) {
    report.dense_skipped = true;
    return report;
  }
  const PointMatrix &pts = M.structure().tree.points().coords;
  t0 = std::chrono::steady_clock::now();
  Matrix K(pts.rows(), pts.rows());
#pragma omp parallel for schedule(static)
  for (Index i = 0; i < pts.rows(); ++i)
    for (Index j = 0; j < pts.rows(); ++j)
      K(i, j) = kernel(pts.row(i).transpose(), pts.row(j).transpose());
  report.dense_build_ms = internal::elapsed_ms(t0);

  t0 = std::chrono::steady_clock::now();
  const Vector y_dense = K * x;
  report.dense_matvec_ms = internal::elapsed_ms(t0);
  report.rel_error = (y_fast - y_dense).norm() / y_dense.norm();
  return report;
}

// Run configuration for the CLI; JSON round-trips field by field.
struct ExperimentConfig {
  Index n = 10000;
  Index d = 10;
  Scalar r = 2;
  std::uint64_t seed = 0;
  std::string input_file;  // non-empty: load data instead of generating
  std::string test_file;   // non-empty: explicit held-out set
  Scalar test_fraction = 0.1;
  std::string kernel = "exponential";
  Scalar sigma = 0;  // 0: grid-determined
  Scalar eta = 0.5;
  Scalar q = 8;
  Index leaf_size = 0;
  Index candidate_count = 0;
  Index sigma_count = 15;
  std::vector<Scalar> sigma_values;  // explicit grid wins over count
  Index lambda_count = 15;
  Scalar lambda_min = 1e-6;
  Scalar lambda_max = 1e-1;
  std::vector<Scalar> lambda_values;
  Index repetitions = 5;
  Index ce_columns = 100;
  Index pe_samples = 1000;
  Scalar cg_tol = 1e-6;
  std::string output;

  void validate() const {
    if (n < 1) throw std::invalid_argument("config: n must be >= 1");
    if (d < 1) throw std::invalid_argument("config: d must be >= 1");
    if (!(r > 0)) throw std::invalid_argument("config: r must be > 0");
    if (!(test_fraction > 0 && test_fraction < 1))
      throw std::invalid_argument("config: test_fraction must be in (0,1)");
    if (!(eta > 0)) throw std::invalid_argument("config: eta must be > 0");
    if (!(q >= 0)) throw std::invalid_argument("config: q must be >= 0");
    if (!(cg_tol > 0)) throw std::invalid_argument("config: cg_tol must be > 0");
    if (repetitions < 1)
      throw std::invalid_argument("config: repetitions must be >= 1");
  }
};

inline void to_json(nlohmann::json &j, const ExperimentConfig &c) {
  j = nlohmann::json{{"n", c.n},
                     {"d", c.d},
                     {"r", c.r},
                     {"seed", c.seed},
                     {"input_file", c.input_file},
                     {"test_file", c.test_file},
                     {"test_fraction", c.test_fraction},
                     {"kernel", c.kernel},
                     {"sigma", c.sigma},
                     {"eta", c.eta},
                     {"q", c.q},
                     {"leaf_size", c.leaf_size},
                     {"candidate_count", c.candidate_count},
                     {"sigma_count", c.sigma_count},
                     {"sigma_values", c.sigma_values},
                     {"lambda_count", c.lambda_count},
                     {"lambda_min", c.lambda_min},
                     {"lambda_max", c.lambda_max},
                     {"lambda_values", c.lambda_values},
                     {"repetitions", c.repetitions},
                     {"ce_columns", c.ce_columns},
                     {"pe_samples", c.pe_samples},
                     {"cg_tol", c.cg_tol},
                     {"output", c.output}};
}

inline void from_json(const nlohmann::json &j, ExperimentConfig &c) {
  ExperimentConfig defaults;
  auto get = [&j](const char *key, auto &field, const auto &fallback) {
    field = j.value(key, fallback);
  };
  get("n", c.n, defaults.n);
  get("d", c.d, defaults.d);
  get("r", c.r, defaults.r);
  get("seed", c.seed, defaults.seed);
  get("input_file", c.input_file, defaults.input_file);
  get("test_file", c.test_file, defaults.test_file);
  get("test_fraction", c.test_fraction, defaults.test_fraction);
  get("kernel", c.kernel, defaults.kernel);
  get("sigma", c.sigma, defaults.sigma);
  get("eta", c.eta, defaults.eta);
  get("q", c.q, defaults.q);
  get("leaf_size", c.leaf_size, defaults.leaf_size);
  get("candidate_count", c.candidate_count, defaults.candidate_count);
  get("sigma_count", c.sigma_count, defaults.sigma_count);
  get("sigma_values", c.sigma_values, defaults.sigma_values);
  get("lambda_count", c.lambda_count, defaults.lambda_count);
  get("lambda_min", c.lambda_min, defaults.lambda_min);
  get("lambda_max", c.lambda_max, defaults.lambda_max);
  get("lambda_values", c.lambda_values, defaults.lambda_values);
  get("repetitions", c.repetitions, defaults.repetitions);
  get("ce_columns", c.ce_columns, defaults.ce_columns);
  get("pe_samples", c.pe_samples, defaults.pe_samples);
  get("cg_tol", c.cg_tol, defaults.cg_tol);
  get("output", c.output, defaults.output);
}

inline nlohmann::json profile_to_json(const AnalyticityProfile &p) {
  nlohmann::json j;
  j["b"] = std::vector<Scalar>(p.b.begin(), p.b.end());
  j["tau"] = std::vector<Scalar>(p.tau.begin(), p.tau.end());
  j["rho"] = std::vector<Scalar>(p.rho.begin(), p.rho.end());
  j["omega"] = std::vector<Scalar>(p.omega.begin(), p.omega.end());
  j["eta"] = p.eta;
  return j;
}

}  // namespace dwfmm
