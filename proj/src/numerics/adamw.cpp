#include "tabood/numerics/adamw.hpp"

#include "tabood/error.hpp"

#include <cmath>

namespace tabood {

AdamW::AdamW(AdamWConfig config, std::span<const Matrix> params) : config_(config) {
  if (!(config_.lr > 0)) throw InvalidArgument("AdamW: learning rate must be positive");
  m_.reserve(params.size());
  v_.reserve(params.size());
  for (const Matrix& p : params) {
    m_.push_back(Matrix::Zero(p.rows(), p.cols()));
    v_.push_back(Matrix::Zero(p.rows(), p.cols()));
  }
}

void AdamW::step(std::span<Matrix> params, std::span<const Matrix> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size())
    throw InvalidArgument("AdamW: parameter count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].rows() != m_[i].rows() || params[i].cols() != m_[i].cols() ||
        grads[i].rows() != m_[i].rows() || grads[i].cols() != m_[i].cols())
      throw InvalidArgument("AdamW: shape mismatch for parameter " + std::to_string(i));
  }
  ++t_;
  const double bias1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double bias2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& w = params[i];
    const Matrix& g = grads[i];
    if (config_.weight_decay != 0.0) w *= (1.0 - config_.lr * config_.weight_decay);
    m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g;
    v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g.cwiseProduct(g);
    w.array() -= config_.lr * (m_[i].array() / bias1) /
                 ((v_[i].array() / bias2).sqrt() + config_.eps);
  }
}

}  // namespace tabood
