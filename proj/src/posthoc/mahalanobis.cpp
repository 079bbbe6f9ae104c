#include "tabood/error.hpp"
#include "tabood/posthoc/scores.hpp"

#include <Eigen/Eigenvalues>

namespace tabood::posthoc {

namespace {

Eigen::LLT<Matrix> factorize(const Matrix& cov, const char* what) {
  if (cov.rows() != cov.cols() || cov.rows() == 0) throw InvalidArgument(std::string(what) + ": covariance must be square");
  if (!cov.allFinite()) throw IllConditionedStats(std::string(what) + ": non-finite covariance");
  Eigen::LLT<Matrix> llt(cov);
  if (llt.info() != Eigen::Success) throw IllConditionedStats(std::string(what) + ": covariance is not positive definite");
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(cov, Eigen::EigenvaluesOnly);
  if (!(eig.eigenvalues().minCoeff() > 0))
    throw IllConditionedStats(std::string(what) + ": covariance is not positive definite");
  return llt;
}

// Squared Mahalanobis distance of every row of `centered` using the factor.
Vector quadratic_forms(const Matrix& centered, const Eigen::LLT<Matrix>& llt) {
  const Matrix half = llt.matrixL().solve(centered.transpose());
  return half.colwise().squaredNorm().transpose();
}

}  // namespace

Matrix regularize_covariance(const Matrix& cov) {
  const double h = static_cast<double>(cov.rows());
  Matrix out = 0.5 * (cov + cov.transpose());
  out.diagonal().array() += 1e-6 * cov.trace() / h;
  return out;
}

ClassStats make_class_stats(Matrix means, Matrix covariance, std::optional<RowVector> background_mean,
                            std::optional<Matrix> background_covariance) {
  if (means.cols() != covariance.rows()) throw InvalidArgument("class stats: mean/covariance size mismatch");
  ClassStats s;
  s.means = std::move(means);
  s.factor = factorize(covariance, "class stats");
  s.covariance = std::move(covariance);
  if (background_mean || background_covariance) {
    if (!background_mean || !background_covariance || background_mean->size() != s.means.cols())
      throw InvalidArgument("class stats: incomplete background statistics");
    s.background_mean = *background_mean;
    s.background_factor = factorize(*background_covariance, "background stats");
    s.background_covariance = *background_covariance;
    s.has_background = true;
  }
  return s;
}

ClassStats fit_class_stats(const Matrix& features, const std::vector<int>& labels, int num_classes,
                           bool background) {
  const Eigen::Index n = features.rows(), h = features.cols();
  if (static_cast<std::size_t>(n) != labels.size() || n == 0)
    throw InvalidArgument("fit_class_stats: labels do not match features");
  Matrix means = Matrix::Zero(num_classes, h);
  std::vector<double> counts(static_cast<std::size_t>(num_classes), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= num_classes) throw InvalidArgument("fit_class_stats: label out of range");
    means.row(y) += features.row(i);
    counts[static_cast<std::size_t>(y)] += 1.0;
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0)
      throw InsufficientClassData("class " + std::to_string(c) + " has no fit samples");
    means.row(c) /= counts[static_cast<std::size_t>(c)];
  }
  Matrix centered(n, h);
  for (Eigen::Index i = 0; i < n; ++i) centered.row(i) = features.row(i) - means.row(labels[static_cast<std::size_t>(i)]);
  const Matrix cov = regularize_covariance(centered.transpose() * centered / static_cast<double>(n));
  if (!background) return make_class_stats(std::move(means), cov);
  const RowVector mu0 = features.colwise().mean();
  const Matrix c0 = features.rowwise() - mu0;
  const Matrix cov0 = regularize_covariance(c0.transpose() * c0 / static_cast<double>(n));
  return make_class_stats(std::move(means), cov, mu0, cov0);
}

Vector score_mahalanobis(const Matrix& features, const ClassStats& stats, bool relative) {
  if (features.cols() != stats.means.cols()) throw InvalidArgument("score_mahalanobis: feature width mismatch");
  if (relative && !stats.has_background) throw InvalidArgument("score_mahalanobis: relative score needs background stats");
  Vector background;
  if (relative) background = quadratic_forms(features.rowwise() - stats.background_mean, stats.background_factor);
  Vector best = Vector::Constant(features.rows(), std::numeric_limits<double>::infinity());
  for (Eigen::Index c = 0; c < stats.means.rows(); ++c) {
    Vector d = quadratic_forms(features.rowwise() - stats.means.row(c), stats.factor);
    if (relative) d -= background;
    best = best.cwiseMin(d);
  }
  return best;
}

}  // namespace tabood::posthoc
