#pragma once

// Independent reference computations used only by tests.

#include "tabood/numerics/types.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

namespace tabood::testing {

/// O(n*m) AUROC: P(ood > id) + 0.5 P(ood == id).
inline double brute_force_auroc(const std::vector<double>& id, const std::vector<double>& ood) {
  double wins = 0.0;
  for (double o : ood)
    for (double i : id) wins += o > i ? 1.0 : (o == i ? 0.5 : 0.0);
  return wins / (static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

/// -log N(x; mean, cov) per row with a dense inverse and determinant.
inline Vector dense_gaussian_nll(const Matrix& x, const RowVector& mean, const Matrix& cov) {
  const Eigen::MatrixXd c = cov;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(c);
  const Eigen::MatrixXd inv = lu.inverse();
  const double log_det = std::log(lu.determinant());
  const double d = static_cast<double>(x.cols());
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Eigen::VectorXd r = (x.row(i) - mean).transpose();
    out(i) = 0.5 * (d * std::log(2.0 * 3.14159265358979323846) + log_det + r.dot(inv * r));
  }
  return out;
}

/// Textbook local outlier factor with full sorts. Distances are Euclidean,
/// neighbours ordered by (distance, index), densities floored at `floor`.
inline Vector brute_force_lof(const Matrix& stored, const Matrix& query, int k, double floor = 1e-12) {
  const Eigen::Index n = stored.rows();
  auto knn = [&](const RowVector& q, Eigen::Index skip) {
    std::vector<std::pair<double, Eigen::Index>> all;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == skip) continue;
      double s = 0.0;
      for (Eigen::Index c = 0; c < stored.cols(); ++c) s += (stored(j, c) - q(c)) * (stored(j, c) - q(c));
      all.emplace_back(std::sqrt(s), j);
    }
    std::sort(all.begin(), all.end());
    all.resize(static_cast<std::size_t>(k));
    return all;
  };
  std::vector<double> kdist(static_cast<std::size_t>(n));
  std::vector<std::vector<std::pair<double, Eigen::Index>>> nbs;
  for (Eigen::Index i = 0; i < n; ++i) {
    nbs.push_back(knn(stored.row(i), i));
    kdist[static_cast<std::size_t>(i)] = nbs.back().back().first;
  }
  auto density = [&](const std::vector<std::pair<double, Eigen::Index>>& nb) {
    double total = 0.0;
    for (const auto& [dist, j] : nb) total += std::max(kdist[static_cast<std::size_t>(j)], dist);
    const double reach = std::max(total / static_cast<double>(k), floor);
    return std::max(1.0 / reach, floor);
  };
  std::vector<double> lrd;
  for (const auto& nb : nbs) lrd.push_back(density(nb));
  Vector out(query.rows());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    const auto nb = knn(query.row(i), -1);
    double s = 0.0;
    for (const auto& [dist, j] : nb) s += lrd[static_cast<std::size_t>(j)];
    out(i) = (s / static_cast<double>(k)) / density(nb);
  }
  return out;
}

/// Class-conditional Gaussians with a shared covariance: per-class means,
/// pooled covariance over n, ridge 1e-6 * trace / h, then the minimum
/// quadratic form, each solved with a dense LU.
inline Vector brute_force_mds(const Matrix& fit, const std::vector<int>& labels, int classes, const Matrix& query) {
  const Eigen::Index n = fit.rows(), h = fit.cols();
  std::vector<Eigen::VectorXd> means(static_cast<std::size_t>(classes), Eigen::VectorXd::Zero(h));
  std::vector<double> counts(static_cast<std::size_t>(classes), 0.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto c = static_cast<std::size_t>(labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < h; ++j) means[c](j) += fit(i, j);
    counts[c] += 1.0;
  }
  for (std::size_t c = 0; c < means.size(); ++c) means[c] /= counts[c];
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(h, h);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd r = fit.row(i).transpose() - means[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
    for (Eigen::Index a = 0; a < h; ++a)
      for (Eigen::Index b = 0; b < h; ++b) cov(a, b) += r(a) * r(b);
  }
  cov /= static_cast<double>(n);
  const double ridge = 1e-6 * cov.trace() / static_cast<double>(h);
  for (Eigen::Index a = 0; a < h; ++a) cov(a, a) += ridge;
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(cov);
  Vector out(query.rows());
  for (Eigen::Index i = 0; i < query.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& mu : means) {
      const Eigen::VectorXd r = query.row(i).transpose() - mu;
      best = std::min(best, r.dot(lu.solve(r)));
    }
    out(i) = best;
  }
  return out;
}

/// L2-regularized binary logistic regression fitted by Newton's method.
struct LogisticOracle {
  Vector weights;  // last entry is the intercept

  static LogisticOracle fit(const Matrix& x, const std::vector<int>& y, double l2 = 1e-4, int iters = 50) {
    const Eigen::Index n = x.rows(), d = x.cols();
    Eigen::MatrixXd a(n, d + 1);
    a << x, Eigen::VectorXd::Ones(n);
    Vector w = Vector::Zero(d + 1);
    for (int it = 0; it < iters; ++it) {
      const Vector z = a * w;
      const Vector p = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      Vector g = Vector::Zero(d + 1);
      Eigen::MatrixXd h = Eigen::MatrixXd::Identity(d + 1, d + 1) * l2;
      for (Eigen::Index i = 0; i < n; ++i) {
        g += (p(i) - y[static_cast<std::size_t>(i)]) * a.row(i).transpose();
        h += p(i) * (1 - p(i)) * a.row(i).transpose() * a.row(i);
      }
      g += l2 * w;
      w -= h.ldlt().solve(g);
    }
    return {w};
  }

  double accuracy(const Matrix& x, const std::vector<int>& y) const {
    const Eigen::Index d = x.cols();
    int correct = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double z = x.row(i).dot(weights.head(d)) + weights(d);
      correct += ((z > 0) ? 1 : 0) == y[static_cast<std::size_t>(i)];
    }
    return static_cast<double>(correct) / static_cast<double>(x.rows());
  }
};

}  // namespace tabood::testing
