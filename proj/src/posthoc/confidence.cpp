#include "tabood/error.hpp"
#include "tabood/numerics/ops.hpp"
#include "tabood/posthoc/scores.hpp"

#include <cmath>

namespace tabood::posthoc {

namespace {

void require_temperature(double t) {
  if (!(t > 0) || !std::isfinite(t)) throw InvalidArgument("temperature must be positive and finite");
}

double max_softmax(const Eigen::Ref<const RowVector>& logits, double temperature) {
  // max_c exp(l_c/T) / sum exp(l/T) = exp(max/T - lse(l/T))
  const double lse = logsumexp(logits, temperature) / temperature;
  return std::exp(logits.maxCoeff() / temperature - lse);
}

}  // namespace

Vector energy(const Matrix& logits, double temperature) {
  require_temperature(temperature);
  Vector out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out(i) = -logsumexp(logits.row(i), temperature);
  return out;
}

Vector score_confidence(const Matrix& logits, Confidence kind, double temperature) {
  require_temperature(temperature);
  if (logits.cols() == 0) throw InvalidArgument("score_confidence: empty logits");
  Vector out(logits.rows());
  switch (kind) {
    case Confidence::msp:
      for (Eigen::Index i = 0; i < logits.rows(); ++i) out(i) = -max_softmax(logits.row(i), 1.0);
      break;
    case Confidence::mls: out = -logits.rowwise().maxCoeff(); break;
    case Confidence::tempscale:
      for (Eigen::Index i = 0; i < logits.rows(); ++i) out(i) = -max_softmax(logits.row(i), temperature);
      break;
    case Confidence::ebo: out = energy(logits, temperature); break;
  }
  return out;
}

double softmax_nll(const Matrix& logits, const std::vector<int>& labels, double temperature) {
  require_temperature(temperature);
  if (static_cast<std::size_t>(logits.rows()) != labels.size() || labels.empty())
    throw InvalidArgument("softmax_nll: labels do not match logits");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.cols()) throw InvalidArgument("softmax_nll: label out of range");
    total += logsumexp(logits.row(i), temperature) / temperature - logits(i, y) / temperature;
  }
  return total / static_cast<double>(logits.rows());
}

double fit_temperature(const Matrix& logits, const std::vector<int>& labels, double t_min, double t_max) {
  if (!(t_min > 0) || !(t_max > t_min)) throw InvalidArgument("fit_temperature: bad search interval");
  auto f = [&](double log_t) { return softmax_nll(logits, labels, std::exp(log_t)); };
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = std::log(t_min), b = std::log(t_max);
  double c = b - invphi * (b - a), d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return std::exp((a + b) / 2.0);
}

}  // namespace tabood::posthoc
