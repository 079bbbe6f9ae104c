#include "tabood/error.hpp"
#include "tabood/posthoc/scores.hpp"

#include <algorithm>
#include <cmath>

namespace tabood::posthoc {

Matrix gram_entries(const Matrix& activation, Eigen::Index rows_per_sample, int power) {
  if (rows_per_sample < 1 || activation.rows() % rows_per_sample != 0)
    throw InvalidArgument("gram_entries: rows are not a multiple of rows_per_sample");
  const Eigen::Index n = activation.rows() / rows_per_sample;
  const Eigen::Index w = activation.cols();
  Matrix out(n, w * (w + 1) / 2);
  for (Eigen::Index s = 0; s < n; ++s) {
    const Matrix a = activation.middleRows(s * rows_per_sample, rows_per_sample).array().pow(power).matrix();
    const Matrix g = a.transpose() * a;
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < w; ++i)
      for (Eigen::Index j = i; j < w; ++j) out(s, k++) = g(i, j);
  }
  return out;
}

GramRanges fit_gram(const std::vector<models::NamedActivation>& activations, const IndexVector& predicted,
                    int num_classes, const std::vector<int>& powers) {
  if (powers.empty()) throw InvalidArgument("fit_gram: no powers");
  GramRanges r;
  r.powers = powers;
  r.seen.assign(static_cast<std::size_t>(num_classes), false);
  for (Eigen::Index p : predicted) r.seen[static_cast<std::size_t>(p)] = true;
  for (const auto& act : activations) {
    for (int p : powers) {
      const Matrix g = gram_entries(act.values, act.rows_per_sample, p);
      if (static_cast<std::size_t>(g.rows()) != predicted.size()) throw InvalidArgument("fit_gram: row mismatch");
      std::vector<Matrix> per_class;
      for (int c = 0; c < num_classes; ++c) {
        Matrix mm(2, g.cols());
        mm.row(0).setConstant(std::numeric_limits<double>::infinity());
        mm.row(1).setConstant(-std::numeric_limits<double>::infinity());
        per_class.push_back(std::move(mm));
      }
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        Matrix& mm = per_class[static_cast<std::size_t>(predicted[static_cast<std::size_t>(i)])];
        mm.row(0) = mm.row(0).cwiseMin(g.row(i));
        mm.row(1) = mm.row(1).cwiseMax(g.row(i));
      }
      r.ranges.push_back(std::move(per_class));
    }
  }
  return r;
}

double gram_deviation(double value, double lo, double hi) {
  if (value < lo) return (lo - value) / std::max(std::abs(lo), 1e-12);
  if (value > hi) return (value - hi) / std::max(std::abs(hi), 1e-12);
  return 0.0;
}

Vector score_gram(const std::vector<models::NamedActivation>& activations, const IndexVector& predicted,
                  const GramRanges& ranges) {
  if (ranges.ranges.size() != activations.size() * ranges.powers.size())
    throw InvalidArgument("score_gram: layer count mismatch");
  for (Eigen::Index p : predicted)
    if (p < 0 || static_cast<std::size_t>(p) >= ranges.seen.size() || !ranges.seen[static_cast<std::size_t>(p)])
      throw InsufficientClassData("score_gram: predicted class " + std::to_string(p) + " was never seen during fit");
  Vector out = Vector::Zero(static_cast<Eigen::Index>(predicted.size()));
  std::size_t slot = 0;
  for (const auto& act : activations) {
    for (int p : ranges.powers) {
      const Matrix g = gram_entries(act.values, act.rows_per_sample, p);
      const auto& per_class = ranges.ranges[slot++];
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        const Matrix& mm = per_class[static_cast<std::size_t>(predicted[static_cast<std::size_t>(i)])];
        double total = 0.0;
        for (Eigen::Index k = 0; k < g.cols(); ++k) total += gram_deviation(g(i, k), mm(0, k), mm(1, k));
        out(i) += total;
      }
    }
  }
  return out;
}

}  // namespace tabood::posthoc
