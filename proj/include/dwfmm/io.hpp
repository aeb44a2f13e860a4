#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include "geometry.hpp"
#include "types.hpp"

namespace dwfmm {

struct LabeledPoints {
  PointSet points;
  std::optional<Vector> values;
};

// CSV layout: header `x1,...,xd[,y]`, one point per line
inline void write_points_csv(const std::string &path, const PointSet &points,
                             const Vector *values = nullptr) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out.precision(17);
  const Index d = points.dim();
  for (Index k = 0; k < d; ++k) out << (k ? "," : "") << "x" << (k + 1);
  if (values) out << ",y";
  out << "\n";
  for (Index i = 0; i < points.size(); ++i) {
    for (Index k = 0; k < d; ++k)
      out << (k ? "," : "") << points.coords(i, k);
    if (values) out << "," << (*values)[i];
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline LabeledPoints read_points_csv(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty file: " + path);
  Index d = 0;
  bool has_values = false;
  {
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ',')) {
      if (field == "y")
        has_values = true;
      else
        ++d;
    }
    if (d == 0) throw std::runtime_error("no coordinate columns: " + path);
  }
  std::vector<Scalar> data;
  std::vector<Scalar> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    Index col = 0;
    while (std::getline(ss, field, ',')) {
      const Scalar v = std::stod(field);
      if (col < d)
        data.push_back(v);
      else
        values.push_back(v);
      ++col;
    }
    if (col != d + (has_values ? 1 : 0))
      throw std::runtime_error("ragged row in " + path);
    ++rows;
  }
  LabeledPoints result;
  PointMatrix coords(rows, d);
  for (Index i = 0; i < rows; ++i)
    for (Index k = 0; k < d; ++k) coords(i, k) = data[i * d + k];
  result.points = PointSet::from_coords(std::move(coords));
  if (has_values)
    result.values = Eigen::Map<Vector>(values.data(), rows);
  return result;
}

// raw little-endian binary: u64 N, u64 d, then N*d f64 row-major
inline void write_points_bin(const std::string &path, const PointSet &points) {
  static_assert(std::endian::native == std::endian::little,
                "binary point format assumes a little-endian host");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const std::uint64_t n = points.size(), d = points.dim();
  out.write(reinterpret_cast<const char *>(&n), 8);
  out.write(reinterpret_cast<const char *>(&d), 8);
  out.write(reinterpret_cast<const char *>(points.coords.data()),
            static_cast<std::streamsize>(n * d * sizeof(Scalar)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline PointSet read_points_bin(const std::string &path) {
  static_assert(std::endian::native == std::endian::little,
                "binary point format assumes a little-endian host");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::uint64_t n = 0, d = 0;
  in.read(reinterpret_cast<char *>(&n), 8);
  in.read(reinterpret_cast<char *>(&d), 8);
  if (!in || n == 0 || d == 0)
    throw std::runtime_error("bad binary header: " + path);
  PointMatrix coords(static_cast<Index>(n), static_cast<Index>(d));
  in.read(reinterpret_cast<char *>(coords.data()),
          static_cast<std::streamsize>(n * d * sizeof(Scalar)));
  if (!in) throw std::runtime_error("truncated binary file: " + path);
  return PointSet::from_coords(std::move(coords));
}

}  // namespace dwfmm
