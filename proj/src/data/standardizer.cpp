#include "tabood/data/standardizer.hpp"

#include "tabood/error.hpp"

#include <cmath>

namespace tabood::data {

Standardizer::Standardizer(std::vector<bool> numeric_mask, Vector mean, Vector stddev)
    : numeric_(std::move(numeric_mask)), mean_(std::move(mean)), std_(std::move(stddev)) {
  if (mean_.size() != static_cast<Eigen::Index>(numeric_.size()) || std_.size() != mean_.size())
    throw InvalidArgument("standardizer: size mismatch");
}

Standardizer Standardizer::fit(const Dataset& ds) {
  std::vector<bool> mask(ds.schema.size());
  for (std::size_t j = 0; j < mask.size(); ++j) mask[j] = ds.schema[j].is_numeric();
  return fit(ds.features, std::move(mask));
}

Standardizer Standardizer::fit(const Matrix& x, std::vector<bool> numeric_mask) {
  if (static_cast<std::size_t>(x.cols()) != numeric_mask.size())
    throw InvalidArgument("standardizer: mask size differs from column count");
  if (x.rows() == 0) throw InvalidArgument("standardizer: cannot fit on zero rows");
  const Eigen::Index d = x.cols();
  Vector mean = Vector::Zero(d);
  Vector sd = Vector::Ones(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    if (!numeric_mask[static_cast<std::size_t>(j)]) continue;
    mean(j) = x.col(j).mean();
    const double var = (x.col(j).array() - mean(j)).square().mean();
    sd(j) = std::max(std::sqrt(var), kStdFloor);
  }
  return Standardizer(std::move(numeric_mask), std::move(mean), std::move(sd));
}

Matrix Standardizer::transform(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != numeric_.size())
    throw InvalidArgument("standardizer: column count mismatch");
  Matrix out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (numeric_[static_cast<std::size_t>(j)]) out.col(j) = (x.col(j).array() - mean_(j)) / std_(j);
  return out;
}

Dataset Standardizer::transform(const Dataset& ds) const {
  Dataset out = ds;
  out.features = transform(ds.features);
  return out;
}

Matrix Standardizer::inverse_transform(const Matrix& x) const {
  if (static_cast<std::size_t>(x.cols()) != numeric_.size())
    throw InvalidArgument("standardizer: column count mismatch");
  Matrix out = x;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (numeric_[static_cast<std::size_t>(j)]) out.col(j) = x.col(j).array() * std_(j) + mean_(j);
  return out;
}

}  // namespace tabood::data
