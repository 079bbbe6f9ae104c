#pragma once

#include "tabood/data/dataset.hpp"

namespace tabood::data {

/// Per-numeric-feature affine normalization fitted on ID training rows.
/// Categorical columns pass through untouched.
class Standardizer {
public:
  static constexpr double kStdFloor = 1e-8;

  Standardizer() = default;
  Standardizer(std::vector<bool> numeric_mask, Vector mean, Vector stddev);

  static Standardizer fit(const Dataset& ds);
  static Standardizer fit(const Matrix& features, std::vector<bool> numeric_mask);

  Matrix transform(const Matrix& features) const;
  Dataset transform(const Dataset& ds) const;
  Matrix inverse_transform(const Matrix& features) const;

  const Vector& mean() const { return mean_; }
  const Vector& stddev() const { return std_; }
  const std::vector<bool>& numeric_mask() const { return numeric_; }
  std::size_t dim() const { return numeric_.size(); }

private:
  std::vector<bool> numeric_;
  Vector mean_;
  Vector std_;
};

}  // namespace tabood::data
