#pragma once

#include "tabood/numerics/types.hpp"

namespace tabood::density {

/// Stored ID points with their k-distances and local reachability densities.
struct NeighborIndex {
  Matrix points;
  int k = 20;
  Vector k_distance;
  Vector lrd;

  /// k nearest stored points to `query` by (distance, index), optionally
  /// skipping one stored index.
  IndexVector neighbors(const RowVector& query, Eigen::Index skip = -1) const;
};

inline constexpr double kDensityFloor = 1e-12;

/// 1 <= k < number of points.
NeighborIndex build_neighbor_index(const Matrix& points, int k);

/// Local outlier factor of each query row against the stored points.
Vector lof_novelty(const NeighborIndex& index, const Matrix& x);

}  // namespace tabood::density
