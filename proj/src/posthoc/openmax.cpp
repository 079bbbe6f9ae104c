#include "tabood/error.hpp"
#include "tabood/numerics/ops.hpp"
#include "tabood/posthoc/scores.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace tabood::posthoc {

double Weibull::cdf(double x) const {
  if (!(x > shift)) return 0.0;
  return 1.0 - std::exp(-std::pow((x - shift) / scale, shape));
}

Weibull fit_weibull(const std::vector<double>& tail) {
  if (tail.empty()) throw InvalidArgument("fit_weibull: empty tail");
  Weibull w;
  w.shift = *std::min_element(tail.begin(), tail.end());
  std::vector<double> x;
  for (double t : tail)
    if (t - w.shift > 0) x.push_back(t - w.shift);
  if (x.empty()) {
    w.scale = 1e-12;
    return w;
  }
  const double top = *std::max_element(x.begin(), x.end());
  for (double& v : x) v /= top;
  const double mean_log = std::accumulate(x.begin(), x.end(), 0.0, [](double s, double v) { return s + std::log(v); }) /
                          static_cast<double>(x.size());
  const bool spread = std::any_of(x.begin(), x.end(), [&](double v) { return v != x.front(); });
  double k = 1.0;
  if (spread) {
    for (int it = 0; it < 100; ++it) {
      double s0 = 0, s1 = 0, s2 = 0;
      for (double v : x) {
        const double p = std::pow(v, k), l = std::log(v);
        s0 += p;
        s1 += p * l;
        s2 += p * l * l;
      }
      const double g = s1 / s0 - 1.0 / k - mean_log;
      const double dg = (s2 * s0 - s1 * s1) / (s0 * s0) + 1.0 / (k * k);
      double next = k - g / dg;
      if (!(next > 0)) next = k / 2;
      next = std::min(next, 1e3);
      const bool done = std::abs(next - k) < 1e-12 * std::max(1.0, k);
      k = next;
      if (done) break;
    }
  }
  double mean_pow = 0;
  for (double v : x) mean_pow += std::pow(v, k);
  mean_pow /= static_cast<double>(x.size());
  w.shape = k;
  w.scale = std::pow(mean_pow, 1.0 / k) * top;
  return w;
}

OpenMaxModel fit_openmax(const Matrix& logits, const std::vector<int>& labels, int num_classes, int tail_size,
                         int alpha) {
  if (tail_size < 1) throw InvalidArgument("fit_openmax: tail size must be >= 1");
  if (alpha < 1 || alpha > num_classes) throw InvalidArgument("fit_openmax: alpha must be in [1, C]");
  const IndexVector pred = argmax_rows(logits);
  OpenMaxModel m;
  m.alpha = alpha;
  m.mavs = Matrix::Zero(num_classes, logits.cols());
  std::vector<std::vector<Eigen::Index>> members(static_cast<std::size_t>(num_classes));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (pred[static_cast<std::size_t>(i)] == y) members[static_cast<std::size_t>(y)].push_back(i);
  }
  for (int c = 0; c < num_classes; ++c) {
    const auto& rows = members[static_cast<std::size_t>(c)];
    if (static_cast<int>(rows.size()) < tail_size)
      throw InsufficientClassData("class " + std::to_string(c) + " has " + std::to_string(rows.size()) +
                                  " correctly classified samples, tail size is " + std::to_string(tail_size));
    for (Eigen::Index r : rows) m.mavs.row(c) += logits.row(r);
    m.mavs.row(c) /= static_cast<double>(rows.size());
    std::vector<double> dist;
    for (Eigen::Index r : rows) dist.push_back((logits.row(r) - m.mavs.row(c)).norm());
    std::sort(dist.begin(), dist.end(), std::greater<>());
    dist.resize(static_cast<std::size_t>(tail_size));
    m.weibulls.push_back(fit_weibull(dist));
  }
  return m;
}

Matrix openmax_logits(const Matrix& logits, const OpenMaxModel& model) {
  const Eigen::Index C = logits.cols();
  if (model.mavs.rows() != C || model.mavs.cols() != C || static_cast<Eigen::Index>(model.weibulls.size()) != C)
    throw InvalidArgument("openmax: model does not match the logit width");
  Matrix out(logits.rows(), C + 1);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(C));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return logits(i, a) > logits(i, b); });
    double unknown = 0.0;
    out.row(i).head(C) = logits.row(i);
    for (int r = 0; r < model.alpha; ++r) {
      const Eigen::Index c = order[static_cast<std::size_t>(r)];
      const double dist = (logits.row(i) - model.mavs.row(c)).norm();
      const double w = static_cast<double>(model.alpha - r) / model.alpha * model.weibulls[static_cast<std::size_t>(c)].cdf(dist);
      out(i, c) = logits(i, c) * (1.0 - w);
      unknown += logits(i, c) * w;
    }
    out(i, C) = unknown;
  }
  return out;
}

Matrix openmax_probabilities(const Matrix& logits, const OpenMaxModel& model) {
  return softmax_rows(openmax_logits(logits, model));
}

Vector score_openmax(const Matrix& logits, const OpenMaxModel& model) {
  return openmax_probabilities(logits, model).col(logits.cols());
}

}  // namespace tabood::posthoc
