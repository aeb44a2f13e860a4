// Command-line driver around the header-only library: synthetic data
// generation, index-set counting tables, interpolation-node inspection,
// tree/partition statistics, assembly, matvec benchmarking, and the kernel
// ridge regression experiment pipeline.
//
// Exit codes: 0 success, 1 numerical failure (non-convergence, singular
// factorization), 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <dwfmm/dwfmm.hpp>

using namespace dwfmm;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// report tables carry 9 significant digits; data files (points, nodes,
// models) keep full round-trip precision
std::string csv9(Scalar v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

void write_text(const std::string &path, const std::string &text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << text;
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

struct DataOpts {
  std::string input;
  Index n = 2000;
  Index d = 3;
  Scalar r = 2;
  std::uint64_t seed = 0;
};

void add_data_options(CLI::App *cmd, DataOpts &opts) {
  cmd->add_option("--input", opts.input,
                  "point file (.csv or .bin); overrides generation");
  cmd->add_option("-n,--num-points", opts.n, "points to generate");
  cmd->add_option("-d,--dim", opts.d, "dimension of generated points");
  cmd->add_option("-r,--decay", opts.r,
                  "decay exponent of the dimension weights k^-r");
  cmd->add_option("--seed", opts.seed, "random seed");
}

LabeledPoints load_data(const DataOpts &opts) {
  if (opts.input.empty())
    return generate_data(opts.n, opts.d, opts.r, opts.seed);
  if (opts.input.ends_with(".bin"))
    return {read_points_bin(opts.input), std::nullopt};
  return read_points_csv(opts.input);
}

struct KernelOpts {
  std::string family = "exponential";
  Scalar sigma = 1.0;
};

void add_kernel_options(CLI::App *cmd, KernelOpts &opts) {
  cmd->add_option("--kernel", opts.family,
                  "exponential, gaussian, or inverse_multiquadric");
  cmd->add_option("--sigma", opts.sigma, "kernel length scale");
}

KernelSpec make_kernel(const KernelOpts &opts) {
  KernelSpec spec{kernel_family_from_string(opts.family), opts.sigma};
  spec.validate();
  return spec;
}

struct ProfileOpts {
  Scalar eta = 0.5;
  bool raw = false;
};

void add_profile_options(CLI::App *cmd, ProfileOpts &opts) {
  cmd->add_option("--eta", opts.eta, "admissibility parameter");
  cmd->add_flag("--raw-weights", opts.raw,
                "skip the omega_1 = 1 weight normalization");
}

AnalyticityProfile make_profile(Index d, Scalar r, const ProfileOpts &opts) {
  return profile_from_dimension_weights(dimension_weights(d, r), opts.eta,
                                        !opts.raw);
}

// ---- fekete node cache -----------------------------------------------------

std::uint64_t fnv1a(const void *data, std::size_t len) {
  const auto *p = static_cast<const unsigned char *>(data);
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string cache_file_name(const WeightedIndexSet &set, Index candidates,
                            std::uint64_t seed) {
  const std::uint64_t whash =
      fnv1a(set.omega.data(), std::size_t(set.omega.size()) * sizeof(Scalar));
  char buf[160];
  std::snprintf(buf, sizeof buf, "fekete_d%lld_q%.9g_w%016llx_c%lld_s%llu.bin",
                static_cast<long long>(set.d), set.q,
                static_cast<unsigned long long>(whash),
                static_cast<long long>(candidates),
                static_cast<unsigned long long>(seed));
  return buf;
}

bool load_cached_nodes(const std::string &path, Index n, Index d,
                       PointMatrix &nodes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::uint64_t fn = 0, fd = 0;
  in.read(reinterpret_cast<char *>(&fn), 8);
  in.read(reinterpret_cast<char *>(&fd), 8);
  if (!in || fn != std::uint64_t(n) || fd != std::uint64_t(d)) return false;
  nodes.resize(n, d);
  in.read(reinterpret_cast<char *>(nodes.data()),
          std::streamsize(n) * d * sizeof(Scalar));
  return bool(in);
}

void store_cached_nodes(const std::string &path, const PointMatrix &nodes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) return;  // cache writes are best effort
  const std::uint64_t n = nodes.rows(), d = nodes.cols();
  out.write(reinterpret_cast<const char *>(&n), 8);
  out.write(reinterpret_cast<const char *>(&d), 8);
  out.write(reinterpret_cast<const char *>(nodes.data()),
            std::streamsize(n) * d * sizeof(Scalar));
}

std::string default_cache_dir() {
  return (fs::temp_directory_path() / "dwfmm-fekete-cache").string();
}

std::string points_csv(const PointMatrix &points) {
  std::ostringstream out;
  out.precision(17);
  for (Index k = 0; k < points.cols(); ++k)
    out << (k ? "," : "") << "x" << (k + 1);
  out << "\n";
  for (Index i = 0; i < points.rows(); ++i) {
    for (Index k = 0; k < points.cols(); ++k)
      out << (k ? "," : "") << points(i, k);
    out << "\n";
  }
  return out.str();
}

Vector tree_ordered_values(const PointSet &tree_points, const Vector &y) {
  Vector out(y.size());
  for (Index i = 0; i < y.size(); ++i) out[i] = y[tree_points.permutation[i]];
  return out;
}

std::pair<Scalar, Scalar> sigma_interval(const PointSet &points,
                                         std::uint64_t seed) {
  const Scalar q_x = separation_radius(points, 20000, seed).value;
  const Scalar diam = box_diam(compute_bounding_box(points));
  return {std::max(Scalar(1e-5), q_x), diam};
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"dimension-weighted fast multipole kernel compression"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads,
                 "cap OpenMP worker threads (0: library default)");

  std::function<int()> run;

  // gen -------------------------------------------------------------------
  auto *gen = app.add_subcommand("gen", "generate labeled benchmark data");
  struct {
    Index n = 10000, d = 10;
    Scalar r = 2;
    std::uint64_t seed = 0;
    std::string output;
    bool binary = false;
  } g;
  gen->add_option("-n,--num-points", g.n, "number of points");
  gen->add_option("-d,--dim", g.d, "dimension");
  gen->add_option("-r,--decay", g.r, "decay exponent of the box edges k^-r");
  gen->add_option("--seed", g.seed, "random seed");
  gen->add_option("-o,--output", g.output, "output file")->required();
  gen->add_flag("--bin", g.binary,
                "write the binary point format (drops target values)");
  gen->callback([&] {
    run = [&]() -> int {
      const auto data = generate_data(g.n, g.d, g.r, g.seed);
      if (g.binary || g.output.ends_with(".bin"))
        write_points_bin(g.output, data.points);
      else
        write_points_csv(g.output, data.points, &*data.values);
      std::cerr << "wrote " << g.n << " points in dimension " << g.d << " to "
                << g.output << "\n";
      return 0;
    };
  });

  // counts ----------------------------------------------------------------
  auto *counts = app.add_subcommand(
      "counts", "interpolation point counts over a (d, q) grid");
  struct {
    Index d_max = 20, q_max = 10;
    Scalar r = 2;
    std::string output;
  } c;
  counts->add_option("--d-max", c.d_max, "largest dimension");
  counts->add_option("--q-max", c.q_max, "largest degree");
  counts->add_option("-r,--decay", c.r, "tau growth exponent k^r");
  counts->add_option("-o,--output", c.output, "CSV output (default stdout)");
  counts->callback([&] {
    run = [&]() -> int {
      write_text(c.output, counts_table(c.d_max, c.q_max, c.r));
      return 0;
    };
  });

  // fekete ----------------------------------------------------------------
  auto *fekete = app.add_subcommand(
      "fekete", "approximate Fekete nodes for a weighted index set");
  struct {
    Index d = 3;
    Scalar q = 4, r = 2;
    ProfileOpts profile;
    Index candidates = 0;
    std::uint64_t seed = 0;
    Index samples = 2000;
    std::string output;
    std::string cache_dir = default_cache_dir();
    bool no_cache = false;
  } f;
  fekete->add_option("-d,--dim", f.d, "dimension");
  fekete->add_option("-q,--degree", f.q, "weighted degree bound");
  fekete->add_option("-r,--decay", f.r, "decay exponent of the weights k^-r");
  add_profile_options(fekete, f.profile);
  fekete->add_option("--candidates", f.candidates,
                     "Halton candidate count (0: 20x basis size)");
  fekete->add_option("--seed", f.seed, "cache key seed");
  fekete->add_option("--lebesgue-samples", f.samples,
                     "sample count for the Lebesgue estimate");
  fekete->add_option("-o,--output", f.output, "node CSV (default stdout)");
  fekete->add_option("--cache-dir", f.cache_dir, "node cache directory");
  fekete->add_flag("--no-cache", f.no_cache, "bypass the node cache");
  fekete->callback([&] {
    run = [&]() -> int {
      const auto profile = make_profile(f.d, f.r, f.profile);
      const auto set = enumerate_index_set(profile.omega, f.q);
      InterpolationScheme scheme;
      bool cached = false;
      std::string cache_path;
      if (!f.no_cache && !f.cache_dir.empty()) {
        fs::create_directories(f.cache_dir);
        cache_path = (fs::path(f.cache_dir) /
                      cache_file_name(set, f.candidates, f.seed))
                         .string();
        PointMatrix nodes;
        if (load_cached_nodes(cache_path, set.size(), set.d, nodes)) {
          scheme = scheme_from_nodes(set, std::move(nodes));
          cached = true;
        }
      }
      if (!cached) {
        scheme = approximate_fekete(set, f.candidates, f.seed);
        if (!cache_path.empty()) store_cached_nodes(cache_path, scheme.nodes);
      }
      write_text(f.output, points_csv(scheme.nodes));
      json summary{{"basis_size", set.size()},
                   {"d", set.d},
                   {"q", f.q},
                   {"condition_estimate", scheme.condition_estimate},
                   {"lebesgue_estimate",
                    lebesgue_estimate(scheme, f.samples)},
                   {"cached", cached}};
      std::cerr << summary.dump(2) << "\n";
      return 0;
    };
  });

  // tree ------------------------------------------------------------------
  auto *tree_cmd = app.add_subcommand("tree", "cluster tree statistics");
  struct {
    DataOpts data;
    Index leaf_size = 32;
    std::string output;
  } t;
  add_data_options(tree_cmd, t.data);
  tree_cmd->add_option("--leaf-size", t.leaf_size, "leaf capacity");
  tree_cmd->add_option("-o,--output", t.output, "JSON output (default stdout)");
  tree_cmd->callback([&] {
    run = [&]() -> int {
      auto data = load_data(t.data);
      const auto tree = ClusterTree::build(std::move(data.points), t.leaf_size);
      Index min_leaf = tree.points().size(), max_leaf = 0;
      for (const Index leaf : tree.leaves()) {
        min_leaf = std::min(min_leaf, tree.cluster(leaf).size());
        max_leaf = std::max(max_leaf, tree.cluster(leaf).size());
      }
      json j{{"n", tree.points().size()},
             {"d", tree.points().dim()},
             {"leaf_size", t.leaf_size},
             {"depth", tree.depth()},
             {"num_clusters", tree.num_clusters()},
             {"num_leaves", static_cast<Index>(tree.leaves().size())},
             {"min_leaf", min_leaf},
             {"max_leaf", max_leaf}};
      write_text(t.output, j.dump(2) + "\n");
      return 0;
    };
  });

  // partition -------------------------------------------------------------
  auto *part_cmd =
      app.add_subcommand("partition", "farfield/nearfield block statistics");
  struct {
    DataOpts data;
    Index leaf_size = 32;
    Scalar eta = 0.5;
    std::string output;
  } p;
  add_data_options(part_cmd, p.data);
  part_cmd->add_option("--leaf-size", p.leaf_size, "leaf capacity");
  part_cmd->add_option("--eta", p.eta, "admissibility parameter");
  part_cmd->add_option("-o,--output", p.output, "JSON output (default stdout)");
  part_cmd->callback([&] {
    run = [&]() -> int {
      auto data = load_data(p.data);
      const auto tree = ClusterTree::build(std::move(data.points), p.leaf_size);
      const auto part = build_partition(tree, p.eta);
      std::uint64_t far_entries = 0, near_entries = 0;
      for (const auto &[a, b] : part.farfield)
        far_entries +=
            std::uint64_t(tree.cluster(a).size()) * tree.cluster(b).size();
      for (const auto &[a, b] : part.nearfield)
        near_entries +=
            std::uint64_t(tree.cluster(a).size()) * tree.cluster(b).size();
      const std::uint64_t n = tree.points().size();
      json j{{"n", tree.points().size()},
             {"eta", p.eta},
             {"leaf_size", p.leaf_size},
             {"farfield_blocks", part.farfield.size()},
             {"nearfield_blocks", part.nearfield.size()},
             {"farfield_entries", far_entries},
             {"nearfield_entries", near_entries},
             {"coverage_exact", far_entries + near_entries == n * n}};
      write_text(p.output, j.dump(2) + "\n");
      return 0;
    };
  });

  // build -----------------------------------------------------------------
  auto *build_cmd =
      app.add_subcommand("build", "assemble the compressed kernel matrix");
  struct {
    DataOpts data;
    KernelOpts kernel;
    ProfileOpts profile;
    Scalar q = 8;
    Index leaf_size = 0, candidates = 0;
    std::string output;
  } b;
  add_data_options(build_cmd, b.data);
  add_kernel_options(build_cmd, b.kernel);
  add_profile_options(build_cmd, b.profile);
  build_cmd->add_option("-q,--degree", b.q, "weighted degree bound");
  build_cmd->add_option("--leaf-size", b.leaf_size,
                        "leaf capacity (0: 2x basis size)");
  build_cmd->add_option("--candidates", b.candidates,
                        "Fekete candidate count (0: 20x basis size)");
  build_cmd->add_option("-o,--output", b.output, "JSON output (default stdout)");
  build_cmd->callback([&] {
    run = [&]() -> int {
      auto data = load_data(b.data);
      const Index n = data.points.size();
      const auto profile =
          make_profile(data.points.dim(), b.data.r, b.profile);
      const auto M =
          assemble(std::move(data.points), make_kernel(b.kernel), profile, b.q,
                   b.leaf_size, b.candidates, b.data.seed);
      const auto &st = M.structure();
      const std::uint64_t dense_floats = std::uint64_t(n) * n;
      json j{{"n", n},
             {"d", st.tree.points().dim()},
             {"q", b.q},
             {"basis_size", st.scheme.rank()},
             {"condition_estimate", st.scheme.condition_estimate},
             {"farfield_blocks_stored", M.num_far_stored()},
             {"nearfield_blocks_stored", M.num_near_stored()},
             {"stored_floats", M.stored_floats()},
             {"dense_floats", dense_floats},
             {"compression_ratio",
              double(M.stored_floats()) / double(dense_floats)},
             {"mem_mb", double(M.mem_bytes()) / (1024.0 * 1024.0)},
             {"structure_ms", M.stats().structure_ms},
             {"coupling_ms", M.stats().coupling_ms},
             {"nearfield_ms", M.stats().nearfield_ms}};
      write_text(b.output, j.dump(2) + "\n");
      return 0;
    };
  });

  // bench -----------------------------------------------------------------
  auto *bench_cmd = app.add_subcommand(
      "bench", "compressed matvec benchmark against a dense oracle");
  struct {
    DataOpts data;
    KernelOpts kernel;
    ProfileOpts profile;
    Scalar q = 8;
    Index leaf_size = 0;
    std::string output;
  } be;
  add_data_options(bench_cmd, be.data);
  add_kernel_options(bench_cmd, be.kernel);
  add_profile_options(bench_cmd, be.profile);
  bench_cmd->add_option("-q,--degree", be.q, "weighted degree bound");
  bench_cmd->add_option("--leaf-size", be.leaf_size,
                        "leaf capacity (0: 2x basis size)");
  bench_cmd->add_option("-o,--output", be.output,
                        "JSON output (default stdout)");
  bench_cmd->callback([&] {
    run = [&]() -> int {
      auto data = load_data(be.data);
      const auto profile =
          make_profile(data.points.dim(), be.data.r, be.profile);
      const auto report =
          bench_matvec(data.points, profile, be.q, make_kernel(be.kernel),
                       be.leaf_size, be.data.seed);
      if (report.dense_skipped)
        std::cerr << "dense oracle skipped: n = " << report.n << " exceeds "
                  << kDenseOracleLimit << "\n";
      json j{{"n", report.n},
             {"q", report.q},
             {"assembly_ms", report.assembly_ms},
             {"compressed_matvec_ms", report.compressed_matvec_ms},
             {"dense_build_ms", report.dense_build_ms},
             {"dense_matvec_ms", report.dense_matvec_ms},
             {"rel_error", report.rel_error},
             {"dense_skipped", report.dense_skipped},
             {"mem_bytes", report.mem_bytes}};
      write_text(be.output, j.dump(2) + "\n");
      return 0;
    };
  });

  // compress-error --------------------------------------------------------
  auto *ce_cmd = app.add_subcommand(
      "compress-error", "compression error over a kernel length-scale grid");
  struct {
    DataOpts data;
    std::string family = "exponential";
    std::vector<Scalar> sigmas;
    Index sigma_count = 15;
    ProfileOpts profile;
    Scalar q = 8;
    Index leaf_size = 0, reps = 5, columns = 100;
    std::string output;
  } ce;
  add_data_options(ce_cmd, ce.data);
  ce_cmd->add_option("--kernel", ce.family, "kernel family");
  ce_cmd->add_option("--sigma", ce.sigmas,
                     "explicit length scales (overrides --sigma-count)");
  ce_cmd->add_option("--sigma-count", ce.sigma_count,
                     "log grid size over [max(1e-5, q_X), diam]");
  add_profile_options(ce_cmd, ce.profile);
  ce_cmd->add_option("-q,--degree", ce.q, "weighted degree bound");
  ce_cmd->add_option("--leaf-size", ce.leaf_size, "leaf capacity (0: auto)");
  ce_cmd->add_option("--reps", ce.reps, "repetitions per length scale");
  ce_cmd->add_option("--columns", ce.columns, "sampled columns per estimate");
  ce_cmd->add_option("-o,--output", ce.output, "CSV output (default stdout)");
  ce_cmd->callback([&] {
    run = [&]() -> int {
      auto data = load_data(ce.data);
      const auto profile =
          make_profile(data.points.dim(), ce.data.r, ce.profile);
      std::vector<Scalar> sigmas = ce.sigmas;
      if (sigmas.empty()) {
        const auto [lo, hi] = sigma_interval(data.points, ce.data.seed);
        sigmas = log_grid(lo, hi, ce.sigma_count);
      }
      auto structure = std::make_shared<const H2Structure>(
          H2Structure::build(std::move(data.points), profile, ce.q,
                             ce.leaf_size, 0, ce.data.seed));
      std::ostringstream out;
      out << "sigma,ce_mean,ce_std\n";
      for (const Scalar sigma : sigmas) {
        const KernelSpec kernel{kernel_family_from_string(ce.family), sigma};
        const auto M = CompressedKernelMatrix::assemble(structure, kernel);
        std::vector<Scalar> samples(ce.reps);
        for (Index rep = 0; rep < ce.reps; ++rep)
          samples[rep] =
              compression_error_estimate(
                  M, kernel, std::min<Index>(ce.columns, M.size()),
                  internal::rep_seed(ce.data.seed, rep))
                  .error;
        const auto [mean, std_dev] = internal::mean_std(samples);
        out << csv9(sigma) << "," << csv9(mean) << "," << csv9(std_dev)
            << "\n";
      }
      write_text(ce.output, out.str());
      return 0;
    };
  });

  // fit -------------------------------------------------------------------
  auto *fit_cmd =
      app.add_subcommand("fit", "train a kernel ridge regression model");
  struct {
    DataOpts data;
    KernelOpts kernel;
    ProfileOpts profile;
    Scalar q = 8, lambda = 1e-3, tol = 1e-6;
    Index leaf_size = 0, max_iter = 0;
    std::string model;
  } ft;
  add_data_options(fit_cmd, ft.data);
  add_kernel_options(fit_cmd, ft.kernel);
  add_profile_options(fit_cmd, ft.profile);
  fit_cmd->add_option("-q,--degree", ft.q, "weighted degree bound");
  fit_cmd->add_option("--lambda", ft.lambda, "ridge parameter");
  fit_cmd->add_option("--tol", ft.tol, "CG relative residual tolerance");
  fit_cmd->add_option("--max-iter", ft.max_iter, "CG iteration cap (0: n)");
  fit_cmd->add_option("--leaf-size", ft.leaf_size, "leaf capacity (0: auto)");
  fit_cmd->add_option("-o,--model", ft.model, "model output file")->required();
  fit_cmd->callback([&] {
    run = [&]() -> int {
      auto data = load_data(ft.data);
      if (!data.values)
        throw std::invalid_argument("fit: training data has no value column");
      const Vector y = *data.values;
      const PointMatrix original = data.points.coords;
      const auto profile =
          make_profile(data.points.dim(), ft.data.r, ft.profile);
      const auto M =
          assemble(std::move(data.points), make_kernel(ft.kernel), profile,
                   ft.q, ft.leaf_size, 0, ft.data.seed);
      const Vector y_tree =
          tree_ordered_values(M.structure().tree.points(), y);
      const auto model = cg_solve(M, y_tree, ft.lambda, ft.tol, ft.max_iter);

      const Vector alpha = model.alpha_original_order();
      json points = json::array();
      for (Index i = 0; i < original.rows(); ++i) {
        json row = json::array();
        for (Index k = 0; k < original.cols(); ++k) row.push_back(original(i, k));
        points.push_back(std::move(row));
      }
      json j{{"kernel",
              {{"family", ft.kernel.family}, {"sigma", ft.kernel.sigma}}},
             {"lambda", ft.lambda},
             {"iterations", model.iterations},
             {"residual", model.residual},
             {"converged", model.converged},
             {"indefinite", model.indefinite},
             {"alpha", std::vector<Scalar>(alpha.begin(), alpha.end())},
             {"points", std::move(points)}};
      write_text(ft.model, j.dump() + "\n");
      json summary{{"iterations", model.iterations},
                   {"residual", model.residual},
                   {"converged", model.converged},
                   {"indefinite", model.indefinite}};
      std::cout << summary.dump(2) << "\n";
      if (!model.converged) {
        if (model.indefinite)
          std::cerr << "fit: compressed operator is not positive definite at "
                       "lambda "
                    << ft.lambda
                    << "; raise q (tighter compression) or lambda\n";
        else
          std::cerr << "fit: CG did not reach tolerance " << ft.tol
                    << " within " << model.iterations << " iterations\n";
        return 1;
      }
      return 0;
    };
  });

  // predict ---------------------------------------------------------------
  auto *pred_cmd =
      app.add_subcommand("predict", "evaluate a trained model on test points");
  struct {
    std::string model, test, output;
  } pr;
  pred_cmd->add_option("--model", pr.model, "model file from fit")->required();
  pred_cmd->add_option("--test", pr.test, "test point file")->required();
  pred_cmd->add_option("-o,--output", pr.output, "CSV output (default stdout)");
  pred_cmd->callback([&] {
    run = [&]() -> int {
      std::ifstream in(pr.model);
      if (!in) throw std::runtime_error("cannot open model: " + pr.model);
      json j;
      in >> j;
      const KernelSpec kernel{
          kernel_family_from_string(j.at("kernel").at("family")),
          j.at("kernel").at("sigma").get<Scalar>()};
      const auto alpha = j.at("alpha").get<std::vector<Scalar>>();
      const auto rows = j.at("points").get<std::vector<std::vector<Scalar>>>();
      if (rows.empty() || alpha.size() != rows.size())
        throw std::runtime_error("model file is inconsistent: " + pr.model);
      const Index n = static_cast<Index>(rows.size());
      const Index d = static_cast<Index>(rows.front().size());
      PointMatrix train(n, d);
      for (Index i = 0; i < n; ++i)
        for (Index k = 0; k < d; ++k) train(i, k) = rows[i][k];

      const LabeledPoints test = pr.test.ends_with(".bin")
                                     ? LabeledPoints{read_points_bin(pr.test),
                                                     std::nullopt}
                                     : read_points_csv(pr.test);
      if (test.points.dim() != d)
        throw std::invalid_argument("predict: test dimension " +
                                    std::to_string(test.points.dim()) +
                                    " does not match model dimension " +
                                    std::to_string(d));
      Vector pred(test.points.size());
#pragma omp parallel for schedule(static)
      for (Index i = 0; i < test.points.size(); ++i) {
        Scalar s = 0;
        for (Index t = 0; t < n; ++t)
          s += alpha[t] * kernel(train.row(t).transpose(),
                                 test.points.coords.row(i).transpose());
        pred[i] = s;
      }
      std::ostringstream out;
      out << "yhat\n";
      for (Index i = 0; i < pred.size(); ++i) out << csv9(pred[i]) << "\n";
      write_text(pr.output, out.str());
      if (test.values)
        std::cerr << json{{"prediction_error",
                           prediction_error(pred, *test.values)}}
                         .dump()
                  << "\n";
      return 0;
    };
  });

  // grid ------------------------------------------------------------------
  auto *grid_cmd = app.add_subcommand(
      "grid", "hyperparameter sweep: fit and evaluate on a sigma x lambda grid");
  struct {
    std::string config;
    ExperimentConfig cfg;
    std::string output;
  } gr;
  grid_cmd->add_option("--config", gr.config, "ExperimentConfig JSON file");
  auto *gr_n =
      grid_cmd->add_option("-n,--num-points", gr.cfg.n, "points to generate");
  auto *gr_d = grid_cmd->add_option("-d,--dim", gr.cfg.d, "dimension");
  auto *gr_r = grid_cmd->add_option("-r,--decay", gr.cfg.r,
                                    "decay exponent of box edges and weights");
  auto *gr_seed = grid_cmd->add_option("--seed", gr.cfg.seed, "random seed");
  auto *gr_kernel =
      grid_cmd->add_option("--kernel", gr.cfg.kernel, "kernel family");
  auto *gr_q =
      grid_cmd->add_option("-q,--degree", gr.cfg.q, "weighted degree bound");
  auto *gr_sc = grid_cmd->add_option("--sigma-count", gr.cfg.sigma_count,
                                     "length scales in the sweep");
  auto *gr_lc = grid_cmd->add_option("--lambda-count", gr.cfg.lambda_count,
                                     "ridge parameters in the sweep");
  auto *gr_reps = grid_cmd->add_option("--reps", gr.cfg.repetitions,
                                       "repetitions per estimate");
  auto *gr_input = grid_cmd->add_option("--input", gr.cfg.input_file,
                                        "labeled CSV instead of generated data");
  auto *gr_out = grid_cmd->add_option("-o,--output", gr.output,
                                      "CSV output (default stdout)");
  grid_cmd->callback([&] {
    run = [&]() -> int {
      ExperimentConfig cfg;
      if (!gr.config.empty()) {
        std::ifstream in(gr.config);
        if (!in) throw std::runtime_error("cannot open config: " + gr.config);
        json j;
        in >> j;
        cfg = j.get<ExperimentConfig>();
      }
      // explicit flags win over the config file
      if (gr_n->count()) cfg.n = gr.cfg.n;
      if (gr_d->count()) cfg.d = gr.cfg.d;
      if (gr_r->count()) cfg.r = gr.cfg.r;
      if (gr_seed->count()) cfg.seed = gr.cfg.seed;
      if (gr_kernel->count()) cfg.kernel = gr.cfg.kernel;
      if (gr_q->count()) cfg.q = gr.cfg.q;
      if (gr_sc->count()) cfg.sigma_count = gr.cfg.sigma_count;
      if (gr_lc->count()) cfg.lambda_count = gr.cfg.lambda_count;
      if (gr_reps->count()) cfg.repetitions = gr.cfg.repetitions;
      if (gr_input->count()) cfg.input_file = gr.cfg.input_file;
      cfg.validate();

      LabeledPoints data =
          cfg.input_file.empty()
              ? generate_data(cfg.n, cfg.d, cfg.r, cfg.seed)
              : read_points_csv(cfg.input_file);
      if (!data.values)
        throw std::invalid_argument("grid: data has no value column");
      LabeledPoints train, test;
      if (cfg.test_file.empty()) {
        std::tie(train, test) = split_data(data, cfg.test_fraction, cfg.seed);
      } else {
        train = std::move(data);
        test = read_points_csv(cfg.test_file);
        if (!test.values)
          throw std::invalid_argument("grid: test file has no value column");
      }

      const auto profile = profile_from_dimension_weights(
          dimension_weights(train.points.dim(), cfg.r), cfg.eta, true);
      GridSpec spec;
      spec.family = kernel_family_from_string(cfg.kernel);
      if (!cfg.sigma_values.empty()) {
        spec.sigmas = cfg.sigma_values;
      } else if (cfg.sigma > 0) {
        spec.sigmas = {cfg.sigma};
      } else {
        const auto [lo, hi] = sigma_interval(train.points, cfg.seed);
        spec.sigmas = log_grid(lo, hi, cfg.sigma_count);
      }
      spec.lambdas = cfg.lambda_values.empty()
                         ? log_grid(cfg.lambda_min, cfg.lambda_max,
                                    cfg.lambda_count)
                         : cfg.lambda_values;
      spec.q = cfg.q;
      spec.leaf_size = cfg.leaf_size;
      spec.candidate_count = cfg.candidate_count;
      spec.seed = cfg.seed;
      spec.repetitions = cfg.repetitions;
      spec.ce_columns = cfg.ce_columns;
      spec.pe_samples = cfg.pe_samples;
      spec.cg_tol = cfg.cg_tol;

      const auto rows =
          hyperparameter_grid(std::move(train.points), *train.values,
                              test.points, *test.values, profile, spec);
      std::ostringstream out;
      out << "sigma,lambda,pe_mean,pe_std,ce_mean,ce_std,cg_iters,wall_ms\n";
      for (const auto &row : rows)
        out << csv9(row.sigma) << "," << csv9(row.lambda) << ","
            << csv9(row.pe_mean) << "," << csv9(row.pe_std) << ","
            << csv9(row.ce_mean) << "," << csv9(row.ce_std) << ","
            << row.cg_iters << "," << csv9(row.wall_ms) << "\n";
      const std::string target = gr_out->count() ? gr.output : cfg.output;
      write_text(target, out.str());
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  apply_threads(threads);
  try {
    return run();
  } catch (const std::invalid_argument &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
