#pragma once

#include <Eigen/Dense>

namespace dwfmm {

using Scalar = double;
using Index = Eigen::Index;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// points live in rows, so keep point data row-major for contiguous access
using PointMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MultiIndex = Eigen::VectorXi;

}  // namespace dwfmm
