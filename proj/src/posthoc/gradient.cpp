#include "tabood/error.hpp"
#include "tabood/numerics/ops.hpp"
#include "tabood/posthoc/scores.hpp"

#include <cmath>

namespace tabood::posthoc {

Vector score_odin(const models::TrainedClassifier& model, const Matrix& x, double temperature, double epsilon) {
  if (!(temperature > 0)) throw InvalidArgument("score_odin: temperature must be positive");
  if (!(epsilon >= 0)) throw InvalidArgument("score_odin: epsilon must be non-negative");
  Matrix perturbed = x;
  if (epsilon > 0) {
    // -log max softmax(l/T) = lse(l/T) - max(l)/T; the max is taken at the
    // predicted class and held fixed while differentiating.
    const Matrix base = model.logits(x);
    const IndexVector pred = argmax_rows(base);
    auto objective = [&](ad::Var logits) {
      ad::Tape& tape = *logits.tape;
      Matrix onehot = Matrix::Zero(logits.rows(), logits.cols());
      for (Eigen::Index i = 0; i < onehot.rows(); ++i) onehot(i, pred[static_cast<std::size_t>(i)]) = 1.0;
      ad::Var scaled = ad::scale(logits, 1.0 / temperature);
      return -ad::sum(ad::mul(ad::log_softmax_rows(scaled), tape.constant(std::move(onehot))));
    };
    const Matrix grad = model.input_gradient(x, objective);
    for (Eigen::Index i = 0; i < grad.size(); ++i) {
      const double g = grad.data()[i];
      perturbed.data()[i] -= epsilon * static_cast<double>((g > 0) - (g < 0));
    }
  }
  return score_confidence(model.logits(perturbed), Confidence::tempscale, temperature);
}

Vector score_gradnorm(const Matrix& features, const Matrix& logits) {
  if (features.rows() != logits.rows()) throw InvalidArgument("score_gradnorm: row mismatch");
  const Matrix p = softmax_rows(logits);
  const double u = 1.0 / static_cast<double>(logits.cols());
  Vector out(features.rows());
  for (Eigen::Index i = 0; i < features.rows(); ++i)
    out(i) = -features.row(i).cwiseAbs().sum() * (p.row(i).array() - u).abs().sum();
  return out;
}

}  // namespace tabood::posthoc
