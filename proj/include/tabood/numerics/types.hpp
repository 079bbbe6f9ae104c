#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace tabood {

/// Row-major dense matrix; batches are laid out one sample per row.
template <typename Scalar>
using MatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using VectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorT = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixT<double>;
using Vector = VectorT<double>;
using RowVector = RowVectorT<double>;
using IndexVector = std::vector<Eigen::Index>;

}  // namespace tabood
