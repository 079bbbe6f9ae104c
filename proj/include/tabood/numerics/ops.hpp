#pragma once

#include "tabood/error.hpp"
#include "tabood/numerics/types.hpp"

#include <cmath>

namespace tabood {

/// Numerically stable softmax of a single logit vector.
template <typename Derived>
VectorT<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  if (logits.size() == 0) throw InvalidArgument("softmax: empty input");
  const Scalar shift = logits.maxCoeff();
  VectorT<Scalar> e = (logits.derived().reshaped().array() - shift).exp().matrix();
  return e / e.sum();
}

/// T * log(sum(exp(logits / T))), max-shifted.
template <typename Derived>
typename Derived::Scalar logsumexp(const Eigen::MatrixBase<Derived>& logits,
                                   typename Derived::Scalar temperature = 1) {
  using Scalar = typename Derived::Scalar;
  if (logits.size() == 0) throw InvalidArgument("logsumexp: empty input");
  if (!(temperature > 0)) throw InvalidArgument("logsumexp: temperature must be positive");
  const Scalar shift = logits.maxCoeff() / temperature;
  const Scalar sum = (logits.derived().reshaped().array() / temperature - shift).exp().sum();
  return temperature * (shift + std::log(sum));
}

/// Row-wise softmax of a batch of logits.
template <typename Derived>
MatrixT<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  if (logits.cols() == 0) throw InvalidArgument("softmax_rows: empty rows");
  MatrixT<Scalar> out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const Scalar shift = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - shift).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename Derived>
VectorT<typename Derived::Scalar> logsumexp_rows(const Eigen::MatrixBase<Derived>& logits,
                                                 typename Derived::Scalar temperature = 1) {
  VectorT<typename Derived::Scalar> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out(i) = logsumexp(logits.row(i), temperature);
  return out;
}

/// Shannon entropy in nats with 0 ln 0 = 0.
template <typename Derived>
typename Derived::Scalar entropy(const Eigen::MatrixBase<Derived>& probs) {
  using Scalar = typename Derived::Scalar;
  Scalar h = 0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    const Scalar p = probs.derived().reshaped()(i);
    if (p > 0) h -= p * std::log(p);
  }
  return h;
}

/// Percentile with linear interpolation between order statistics (q in [0, 100]).
double percentile(std::vector<double> values, double q);

/// Arg-max per row, lowest index on ties.
std::vector<Eigen::Index> argmax_rows(const Matrix& m);

bool all_finite(const Matrix& m);

}  // namespace tabood
