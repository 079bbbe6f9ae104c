#include "nets.hpp"

#include "tabood/error.hpp"

#include <cmath>

namespace tabood::density::nets {

std::vector<Matrix> init_mlp(const std::vector<Eigen::Index>& sizes, Rng& rng, bool zero_last) {
  std::vector<Matrix> p;
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<Eigen::Index>(sizes[l], 1)));
    Matrix w(sizes[l], sizes[l + 1]), b(1, sizes[l + 1]);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = rng.uniform(-bound, bound);
    for (Eigen::Index i = 0; i < b.size(); ++i) b.data()[i] = rng.uniform(-bound, bound);
    if (zero_last && l + 2 == sizes.size()) {
      w.setZero();
      b.setZero();
    }
    p.push_back(std::move(w));
    p.push_back(std::move(b));
  }
  return p;
}

ad::Var mlp_graph(std::span<const ad::Var> params, ad::Var x) {
  for (std::size_t l = 0; l < params.size(); l += 2) {
    x = ad::linear(x, params[l], params[l + 1]);
    if (l + 2 < params.size()) x = ad::relu(x);
  }
  return x;
}

Matrix mlp_eval(const std::vector<Matrix>& params, const Matrix& x) {
  Matrix h = x;
  for (std::size_t l = 0; l < params.size(); l += 2) {
    Matrix next = h * params[l];
    next.rowwise() += params[l + 1].row(0);
    if (l + 2 < params.size()) next = next.cwiseMax(0.0);
    h = std::move(next);
  }
  return h;
}

std::vector<double> train(std::vector<Matrix*> params, const Matrix& x, const models::TrainConfig& cfg,
                          const BatchLoss& loss, const std::string& what) {
  cfg.validate();
  if (x.rows() == 0) throw InvalidArgument(what + ": empty training data");
  if (!x.allFinite()) throw InvalidArgument(what + ": non-finite training data");
  std::vector<Matrix> values;
  for (Matrix* p : params) values.push_back(*p);
  AdamW opt(cfg.adamw(), values);
  Rng shuffle(mix_seed(cfg.seed, 1));
  Rng noise(mix_seed(cfg.seed, 2));
  const Eigen::Index n = x.rows();
  std::vector<double> losses;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffle.permutation(static_cast<std::size_t>(n));
    double total = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Matrix batch(len, x.cols());
      for (Eigen::Index i = 0; i < len; ++i) batch.row(i) = x.row(static_cast<Eigen::Index>(order[start + i]));
      ad::Tape tape;
      std::vector<ad::Var> vars;
      for (const Matrix& v : values) vars.push_back(tape.variable(v));
      ad::Var l = loss(tape, vars, batch, noise);
      const double value = l.value()(0, 0);
      if (!std::isfinite(value)) throw DivergedTraining(what + ": non-finite loss", epoch + 1);
      tape.backward(l);
      std::vector<Matrix> grads;
      for (const ad::Var& v : vars) grads.push_back(tape.gradient(v));
      opt.step(values, grads);
      total += value * static_cast<double>(len);
    }
    losses.push_back(total / static_cast<double>(n));
  }
  for (std::size_t i = 0; i < params.size(); ++i) *params[i] = std::move(values[i]);
  return losses;
}

}  // namespace tabood::density::nets
