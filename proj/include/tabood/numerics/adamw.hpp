#pragma once

#include "tabood/numerics/types.hpp"

#include <span>
#include <vector>

namespace tabood {

/// Defaults beyond the learning rate are the conventional Adam values.
struct AdamWConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
};

/// AdamW with decoupled weight decay and bias-corrected moments.
class AdamW {
public:
  AdamW(AdamWConfig config, std::span<const Matrix> params);

  /// Applies one update in place. Throws InvalidArgument on any shape mismatch.
  void step(std::span<Matrix> params, std::span<const Matrix> grads);

  long step_count() const { return t_; }
  const AdamWConfig& config() const { return config_; }
  const std::vector<Matrix>& first_moments() const { return m_; }
  const std::vector<Matrix>& second_moments() const { return v_; }

private:
  AdamWConfig config_;
  long t_ = 0;
  std::vector<Matrix> m_;
  std::vector<Matrix> v_;
};

}  // namespace tabood
