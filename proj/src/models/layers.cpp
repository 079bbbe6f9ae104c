#include "layers.hpp"

#include "tabood/error.hpp"

#include <cmath>

namespace tabood::models::layers {

ad::Var dense(const GraphContext& ctx, ad::Var x, const std::string& prefix) {
  return ad::linear(x, ctx.param(prefix + ".weight"), ctx.param(prefix + ".bias"));
}

ad::Var dropout(const GraphContext& ctx, ad::Var x, double rate) {
  if (ctx.mode != Mode::train || rate <= 0.0) return x;
  if (ctx.rng == nullptr) throw InvalidArgument("dropout: training mode needs an Rng");
  const double keep = 1.0 - rate;
  Matrix mask(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = ctx.rng->uniform() < keep ? 1.0 / keep : 0.0;
  return ad::mul(x, ctx.tape.constant(std::move(mask)));
}

ad::Var layer_norm(const GraphContext& ctx, ad::Var x, const std::string& prefix) {
  ad::Var centered = ad::add_col(x, -ad::row_mean(x));
  ad::Var var = ad::row_mean(ad::square(centered));
  ad::Var normed = ad::mul_col(centered, ad::pow(ad::add_scalar(var, kNormEps), -0.5));
  return ad::add_row(ad::mul_row(normed, ctx.param(prefix + ".gamma")), ctx.param(prefix + ".beta"));
}

ad::Var batch_norm(GraphContext& ctx, ad::Var x, const std::string& prefix) {
  ad::Var normed;
  if (ctx.mode == Mode::train) {
    ad::Var mu = ad::col_mean(x);
    ad::Var centered = ad::add_row(x, -mu);
    ad::Var var = ad::col_mean(ad::square(centered));
    normed = ad::mul_row(centered, ad::pow(ad::add_scalar(var, kNormEps), -0.5));
    if (ctx.buffers != nullptr) {
      const std::size_t im = ctx.buffers->index_of(prefix + ".running_mean");
      const std::size_t iv = ctx.buffers->index_of(prefix + ".running_var");
      const double n = static_cast<double>(x.rows());
      // Running variance uses the unbiased batch estimate.
      const Matrix unbiased = n > 1 ? Matrix(var.value() * (n / (n - 1.0))) : var.value();
      ctx.buffers->values[im] = (1.0 - kBatchNormMomentum) * ctx.buffers->values[im] + kBatchNormMomentum * mu.value();
      ctx.buffers->values[iv] = (1.0 - kBatchNormMomentum) * ctx.buffers->values[iv] + kBatchNormMomentum * unbiased;
    }
  } else {
    if (ctx.buffers == nullptr) throw InvalidArgument("batch_norm: eval mode needs running statistics");
    const Matrix& rm = ctx.buffers->at(prefix + ".running_mean");
    const Matrix& rv = ctx.buffers->at(prefix + ".running_var");
    const Matrix inv = (rv.array() + kNormEps).rsqrt().matrix();
    normed = ad::mul_row(ad::add_row(x, ctx.tape.constant(-rm)), ctx.tape.constant(inv));
  }
  return ad::add_row(ad::mul_row(normed, ctx.param(prefix + ".gamma")), ctx.param(prefix + ".beta"));
}

Matrix uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

void add_dense(ParameterSet& p, Rng& rng, const std::string& prefix, Eigen::Index in, Eigen::Index out) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(in, 1)));
  p.add(prefix + ".weight", uniform(rng, in, out, bound));
  p.add(prefix + ".bias", uniform(rng, 1, out, bound));
}

void add_norm(ParameterSet& p, const std::string& prefix, Eigen::Index dim) {
  p.add(prefix + ".gamma", Matrix::Ones(1, dim));
  p.add(prefix + ".beta", Matrix::Zero(1, dim));
}

void add_running_stats(ParameterSet& b, const std::string& prefix, Eigen::Index dim) {
  b.add(prefix + ".running_mean", Matrix::Zero(1, dim));
  b.add(prefix + ".running_var", Matrix::Ones(1, dim));
}

ad::Var encode_one_hot(ad::Tape& tape, ad::Var numeric, const InputLayout& layout, const Matrix& batch) {
  if (layout.categorical.empty()) return numeric;
  Eigen::Index width = 0;
  for (int c : layout.cardinalities) width += c;
  Matrix onehot = Matrix::Zero(batch.rows(), width);
  Eigen::Index offset = 0;
  for (std::size_t c = 0; c < layout.categorical.size(); ++c) {
    for (Eigen::Index i = 0; i < batch.rows(); ++i) {
      const auto code = static_cast<Eigen::Index>(batch(i, layout.categorical[c]));
      onehot(i, offset + code) = 1.0;
    }
    offset += layout.cardinalities[c];
  }
  ad::Var encoded = tape.constant(std::move(onehot));
  return numeric.cols() == 0 ? encoded : ad::hcat(numeric, encoded);
}

}  // namespace tabood::models::layers
