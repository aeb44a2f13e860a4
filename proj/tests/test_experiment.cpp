#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <dwfmm/experiment.hpp>
#include <dwfmm/io.hpp>
#include <filesystem>
#include <sstream>

#include "support.hpp"

using namespace dwfmm;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string &name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() { std::remove(path.c_str()); }
};

std::vector<std::string> split_lines(const std::string &text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_CASE("target function values at pinned radii", "[experiment]") {
  REQUIRE(target_value(0.0) == 0.5);
  REQUIRE(std::abs(target_value(1e-12) - 0.5) <= 1e-9);
  // sin(pi) / (2 pi) up to the roundoff of pi itself
  REQUIRE(std::abs(target_value(0.25)) <= 1e-15);
}

TEST_CASE("generated data lives in the anisotropic box", "[experiment]") {
  const auto data = generate_data(500, 4, 2.0, 9);
  REQUIRE(data.points.size() == 500);
  REQUIRE(data.points.dim() == 4);
  REQUIRE(data.values.has_value());
  for (Index i = 0; i < 500; ++i)
    for (Index k = 0; k < 4; ++k) {
      REQUIRE(data.points.coords(i, k) >= 0.0);
      REQUIRE(data.points.coords(i, k) <=
              std::pow(Scalar(k + 1), -2.0));
    }
  for (Index i = 0; i < 500; ++i)
    REQUIRE((*data.values)[i] ==
            target_value(data.points.coords.row(i).norm()));

  const auto again = generate_data(500, 4, 2.0, 9);
  REQUIRE(data.points.coords == again.points.coords);
  const auto other = generate_data(500, 4, 2.0, 10);
  REQUIRE_FALSE(data.points.coords == other.points.coords);
}

TEST_CASE("dimension weights follow the decay law", "[experiment]") {
  const Vector b = dimension_weights(5, 3.0);
  for (Index k = 0; k < 5; ++k)
    REQUIRE_THAT(b[k], Catch::Matchers::WithinRel(
                           std::pow(Scalar(k + 1), -3.0), 1e-15));
}

TEST_CASE("train/test split partitions the data", "[experiment]") {
  const auto data = generate_data(200, 3, 2.0, 4);
  const auto [train, test] = split_data(data, 0.25, 7);
  REQUIRE(train.points.size() == 150);
  REQUIRE(test.points.size() == 50);
  REQUIRE(train.values->size() == 150);
  REQUIRE(test.values->size() == 50);

  // every original row appears exactly once, with its value attached
  std::vector<int> seen(200, 0);
  auto account = [&](const LabeledPoints &part) {
    for (Index i = 0; i < part.points.size(); ++i) {
      const Index original = part.points.permutation[i];
      seen[original] += 1;
      REQUIRE(part.points.coords.row(i) == data.points.coords.row(original));
      REQUIRE((*part.values)[i] == (*data.values)[original]);
    }
  };
  account(train);
  account(test);
  for (int s : seen) REQUIRE(s == 1);

  const auto [train2, test2] = split_data(data, 0.25, 7);
  REQUIRE(train.points.coords == train2.points.coords);
}

TEST_CASE("counting table reproduces pinned entries", "[experiment]") {
  const std::string csv = counts_table(20, 10, 2.0);
  const auto lines = split_lines(csv);
  REQUIRE(lines.front() == "d,q,tpi,tdi,wtdi_normalized,wtdi_raw");
  REQUIRE(lines.size() == 1 + 20 * 11);

  auto find_row = [&](Index d, Index q) {
    const std::string prefix =
        std::to_string(d) + "," + std::to_string(q) + ",";
    for (const auto &line : lines)
      if (line.rfind(prefix, 0) == 0) return line;
    return std::string();
  };
  REQUIRE(find_row(2, 2) == "2,2,9,6,3,2");
  REQUIRE(find_row(20, 10) == "20,10,672749994932560009201,30045015,250,130");
}

TEST_CASE("weighted counts shrink as the decay strengthens", "[experiment]") {
  auto wtdi = [](Scalar r) {
    Vector tau(20);
    for (Index k = 0; k < 20; ++k) tau[k] = std::pow(Scalar(k + 1), r);
    return enumerate_index_set(profile_from_tau(tau, true).omega, 8).size();
  };
  const Index c2 = wtdi(2.0), c3 = wtdi(3.0), c4 = wtdi(4.0);
  REQUIRE(c2 >= c3);
  REQUIRE(c3 >= c4);
  REQUIRE(c2 > c4);
}

TEST_CASE("matvec bench agrees with its dense oracle", "[experiment]") {
  const auto data = generate_data(400, 3, 2.0, 12);
  const auto profile =
      profile_from_dimension_weights(dimension_weights(3, 2.0), 0.5, true);
  const KernelSpec kernel{KernelFamily::exponential, 0.4};

  Scalar previous = std::numeric_limits<Scalar>::infinity();
  for (const Scalar q : {2.0, 4.0, 6.0}) {
    const auto report = bench_matvec(data.points, profile, q, kernel);
    REQUIRE_FALSE(report.dense_skipped);
    REQUIRE(report.n == 400);
    REQUIRE(report.rel_error >= 0.0);
    REQUIRE(report.rel_error < previous);
    previous = report.rel_error;

    const auto again = bench_matvec(data.points, profile, q, kernel);
    REQUIRE(again.rel_error == report.rel_error);
  }
}

TEST_CASE("experiment configs round-trip through JSON", "[experiment]") {
  ExperimentConfig config;
  config.n = 1234;
  config.d = 7;
  config.r = 3.0;
  config.seed = 99;
  config.kernel = "gaussian";
  config.sigma = 0.25;
  config.q = 6;
  config.sigma_values = {0.1, 0.2};
  config.lambda_count = 4;
  config.output = "out.csv";

  const nlohmann::json j = config;
  const auto back = j.get<ExperimentConfig>();
  REQUIRE(nlohmann::json(back) == j);
  REQUIRE(back.n == 1234);
  REQUIRE(back.sigma_values == config.sigma_values);

  // absent fields fall back to defaults
  const auto sparse = nlohmann::json::parse(R"({"n": 50})")
                          .get<ExperimentConfig>();
  REQUIRE(sparse.n == 50);
  REQUIRE(sparse.d == ExperimentConfig{}.d);
  REQUIRE(sparse.kernel == "exponential");

  ExperimentConfig bad;
  bad.r = -1;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = ExperimentConfig{};
  bad.test_fraction = 1.5;
  REQUIRE_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("profiles serialize all derived vectors", "[experiment]") {
  const auto profile =
      profile_from_dimension_weights(dimension_weights(3, 2.0), 0.5, true);
  const auto j = profile_to_json(profile);
  REQUIRE(j["b"].size() == 3);
  REQUIRE(j["tau"].size() == 3);
  REQUIRE(j["rho"].size() == 3);
  REQUIRE(j["omega"].size() == 3);
  REQUIRE(j["omega"][0].get<Scalar>() == 1.0);
  REQUIRE(j["eta"].get<Scalar>() == 0.5);
}

TEST_CASE("points round-trip through CSV", "[experiment]") {
  const auto data = generate_data(60, 3, 2.0, 21);
  TempFile file("dwfmm_test_points.csv");

  write_points_csv(file.path, data.points, &*data.values);
  const auto back = read_points_csv(file.path);
  REQUIRE(back.points.size() == 60);
  REQUIRE(back.points.dim() == 3);
  REQUIRE(back.values.has_value());
  // 17 significant digits reproduce doubles exactly
  REQUIRE(back.points.coords == data.points.coords);
  REQUIRE(*back.values == *data.values);

  write_points_csv(file.path, data.points, nullptr);
  const auto plain = read_points_csv(file.path);
  REQUIRE_FALSE(plain.values.has_value());
  REQUIRE(plain.points.coords == data.points.coords);
}

TEST_CASE("points round-trip through the binary format", "[experiment]") {
  const auto data = generate_data(128, 5, 2.0, 22);
  TempFile file("dwfmm_test_points.bin");
  write_points_bin(file.path, data.points);
  const PointSet back = read_points_bin(file.path);
  REQUIRE(back.coords == data.points.coords);
}

TEST_CASE("malformed point files are rejected", "[experiment]") {
  TempFile file("dwfmm_test_ragged.csv");
  {
    std::ofstream out(file.path);
    out << "x1,x2\n0.1,0.2\n0.3\n";
  }
  REQUIRE_THROWS_AS(read_points_csv(file.path), std::runtime_error);
  REQUIRE_THROWS_AS(read_points_csv("/nonexistent/nowhere.csv"),
                    std::runtime_error);
  REQUIRE_THROWS_AS(read_points_bin("/nonexistent/nowhere.bin"),
                    std::runtime_error);
}
