#include "tabood/error.hpp"
#include "tabood/numerics/ops.hpp"
#include "tabood/posthoc/scores.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace tabood::posthoc {

Matrix l2_normalize_rows(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.row(i) /= std::max(m.row(i).norm(), 1e-12);
  return out;
}

Vector score_knn(const Matrix& features, const Matrix& bank, int k, bool normalize) {
  if (k < 1 || k > bank.rows()) throw InvalidArgument("score_knn: k must be in [1, bank size]");
  if (features.cols() != bank.cols()) throw InvalidArgument("score_knn: feature width mismatch");
  const Matrix q = normalize ? l2_normalize_rows(features) : features;
  const Matrix b = normalize ? l2_normalize_rows(bank) : bank;
  Vector out(q.rows());
  std::vector<double> dist(static_cast<std::size_t>(b.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) dist[static_cast<std::size_t>(j)] = (q.row(i) - b.row(j)).norm();
    std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
    out(i) = dist[static_cast<std::size_t>(k - 1)];
  }
  return out;
}

VimSubspace fit_vim(const Matrix& features, const Matrix& logits, const Matrix& head_weight,
                    const RowVector& head_bias, int dim) {
  const Eigen::Index h = features.cols();
  if (dim < 1 || dim >= h) throw InvalidArgument("fit_vim: subspace dimension must be in [1, h)");
  if (head_weight.rows() != h || head_bias.size() != head_weight.cols())
    throw InvalidArgument("fit_vim: head shape mismatch");
  VimSubspace v;
  // u W = -b, least-norm solution.
  const Matrix wt = head_weight.transpose();
  v.origin = -(wt.completeOrthogonalDecomposition().solve(head_bias.transpose())).transpose();
  const Matrix centered = features.rowwise() - v.origin;
  const Matrix cov = centered.transpose() * centered / static_cast<double>(features.rows());
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  // eigenvalues ascending; principal directions are the last `dim` columns
  v.basis = eig.eigenvectors().rightCols(dim);
  const Vector r = vim_residual(features, v);
  const double mean_r = r.mean();
  const double mean_logit = logits.rowwise().maxCoeff().mean();
  v.alpha = mean_r > 0 ? mean_logit / mean_r : 1.0;
  return v;
}

Vector vim_residual(const Matrix& features, const VimSubspace& vim) {
  if (features.cols() != vim.basis.rows()) throw InvalidArgument("vim: feature width mismatch");
  const Matrix centered = features.rowwise() - vim.origin;
  const Matrix residual = centered - (centered * vim.basis) * vim.basis.transpose();
  return residual.rowwise().norm();
}

Vector score_vim(const Matrix& features, const Matrix& logits, const VimSubspace& vim) {
  const Eigen::Index q = vim.basis.cols();
  const Matrix gram = vim.basis.transpose() * vim.basis - Matrix::Identity(q, q);
  if (gram.cwiseAbs().maxCoeff() > 1e-8) throw InvalidArgument("score_vim: basis is not orthonormal");
  if (features.rows() != logits.rows()) throw InvalidArgument("score_vim: row mismatch");
  const Vector r = vim_residual(features, vim);
  Vector out(features.rows());
  RowVector row(logits.cols() + 1);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    row << vim.alpha * r(i), logits.row(i);
    out(i) = std::exp(row(0) - logsumexp(row));
  }
  return out;
}

Matrix fit_she_patterns(const Matrix& features, const Matrix& logits, const std::vector<int>& labels,
                        int num_classes) {
  const IndexVector pred = argmax_rows(logits);
  Matrix patterns = Matrix::Zero(num_classes, features.cols());
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (Eigen::Index i = 0; i < features.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (pred[static_cast<std::size_t>(i)] != y) continue;
    patterns.row(y) += features.row(i);
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw InsufficientClassData("class " + std::to_string(c) + " has no correctly classified samples");
    patterns.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  return patterns;
}

Vector score_she(const Matrix& features, const Matrix& patterns, const IndexVector& predicted) {
  if (features.cols() != patterns.cols() || static_cast<std::size_t>(features.rows()) != predicted.size())
    throw InvalidArgument("score_she: shape mismatch");
  Vector out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out(i) = -features.row(i).dot(patterns.row(predicted[static_cast<std::size_t>(i)]));
  return out;
}

Matrix fit_klm_templates(const Matrix& probs, int num_classes) {
  const IndexVector pred = argmax_rows(probs);
  Matrix templates = Matrix::Zero(num_classes, probs.cols());
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    templates.row(pred[static_cast<std::size_t>(i)]) += probs.row(i);
    counts[static_cast<std::size_t>(pred[static_cast<std::size_t>(i)])] += 1.0;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw InsufficientClassData("no validation sample is predicted as class " + std::to_string(c));
    templates.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  return templates;
}

Vector score_klm(const Matrix& probs, const Matrix& templates) {
  if (probs.cols() != templates.cols()) throw InvalidArgument("score_klm: class count mismatch");
  Vector out(probs.rows());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < templates.rows(); ++c) {
      double kl = 0.0;
      for (Eigen::Index j = 0; j < probs.cols(); ++j) {
        const double t = templates(c, j);
        if (t > 0) kl += t * std::log(t / std::max(probs(i, j), 1e-12));
      }
      best = std::min(best, kl);
    }
    out(i) = best;
  }
  return out;
}

}  // namespace tabood::posthoc
