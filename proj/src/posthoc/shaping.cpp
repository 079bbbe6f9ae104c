#include "tabood/error.hpp"
#include "tabood/numerics/ops.hpp"
#include "tabood/posthoc/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabood::posthoc {

Matrix head_logits(const Matrix& features, const Matrix& weight, const RowVector& bias) {
  if (features.cols() != weight.rows() || bias.size() != weight.cols())
    throw InvalidArgument("head_logits: shape mismatch");
  Matrix out = features * weight;
  out.rowwise() += bias;
  return out;
}

Matrix react_clamp(const Matrix& features, double c) {
  if (std::isnan(c)) throw InvalidArgument("react_clamp: threshold is NaN");
  return features.cwiseMin(c);
}

Vector score_react(const Matrix& features, double c, const Matrix& weight, const RowVector& bias) {
  return energy(head_logits(react_clamp(features, c), weight, bias));
}

Matrix dice_mask(const Matrix& weight, const RowVector& mean_activation, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("dice_mask: p must be in (0, 1]");
  const Eigen::Index h = weight.rows();
  if (mean_activation.size() != h) throw InvalidArgument("dice_mask: mean activation width mismatch");
  const auto keep = static_cast<Eigen::Index>(std::llround(p * static_cast<double>(h)));
  Matrix masked = Matrix::Zero(h, weight.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(h));
  for (Eigen::Index c = 0; c < weight.cols(); ++c) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return weight(a, c) * mean_activation(a) > weight(b, c) * mean_activation(b);
    });
    for (Eigen::Index r = 0; r < keep; ++r) {
      const Eigen::Index i = order[static_cast<std::size_t>(r)];
      masked(i, c) = weight(i, c);
    }
  }
  return masked;
}

Vector score_dice(const Matrix& features, const Matrix& masked_weight, const RowVector& bias) {
  return energy(head_logits(features, masked_weight, bias));
}

Matrix ash_transform(const Matrix& features, double pct, AshVariant variant) {
  if (!(pct >= 0.0 && pct < 100.0)) throw InvalidArgument("ash_transform: percentile must be in [0, 100)");
  Matrix out = features;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const std::vector<double> row(features.row(i).data(), features.row(i).data() + features.cols());
    const double threshold = percentile(row, pct);
    const double before = features.row(i).sum();
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      if (out(i, j) < threshold) out(i, j) = 0.0;
    if (variant == AshVariant::scale) {
      const double after = out.row(i).sum();
      if (after != 0.0) out.row(i) *= before / after;
    }
  }
  return out;
}

Vector score_ash(const Matrix& features, double pct, AshVariant variant, const Matrix& weight,
                 const RowVector& bias) {
  return energy(head_logits(ash_transform(features, pct, variant), weight, bias));
}

}  // namespace tabood::posthoc
