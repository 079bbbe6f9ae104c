#pragma once

#include "tabood/numerics/types.hpp"

namespace tabood::density {

/// Probabilistic PCA, C = W W^T + sigma2 I.
struct PpcaModel {
  RowVector mean;        // (d)
  Matrix loadings;       // (d, q)
  double sigma2 = 1.0;
  Vector eigenvalues;    // sample covariance, descending (empty if built by hand)
  Matrix eigenvectors;   // matching columns
  // cached for scoring
  Matrix basis;          // (d, q) orthonormal, W = basis * R
  Matrix core_inverse;   // (R R^T + sigma2 I)^-1
  double log_det = 0.0;  // log |C|

  std::size_t dim() const { return static_cast<std::size_t>(mean.size()); }
  Matrix covariance() const;
};

inline constexpr double kEigenFloor = 1e-12;

/// ML fit on the rows of `x`; 1 <= q < d.
PpcaModel fit_ppca(const Matrix& x, int q);

/// Builds a model from explicit parameters and fills the caches.
PpcaModel make_ppca(RowVector mean, Matrix loadings, double sigma2);

/// -log N(x; mu, C) per row, low-rank evaluation.
Vector ppca_novelty(const PpcaModel& model, const Matrix& x);

}  // namespace tabood::density
