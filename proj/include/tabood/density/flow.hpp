#pragma once

#include "tabood/models/config.hpp"
#include "tabood/numerics/rng.hpp"
#include "tabood/numerics/types.hpp"

#include <vector>

namespace tabood::density {

struct FlowConfig {
  int layers = 6;
  int hidden_width = 64;
  double max_scale = 4.0;
};

/// y = x * exp(s(m x)) + t(m x) on the unmasked coordinates; s = tanh(.) * max_scale.
struct CouplingLayer {
  RowVector mask;  // 1 = conditioning (passed through)
  std::vector<Matrix> scale_net;  // W0, b0, W1, b1, W2, b2
  std::vector<Matrix> shift_net;
};

struct FlowModel {
  FlowConfig config;
  std::vector<CouplingLayer> layers;
  std::vector<double> epoch_losses;

  std::size_t dim() const { return layers.empty() ? 0 : static_cast<std::size_t>(layers.front().mask.size()); }

  /// Maps x to the base space; adds per-row log|det J| into `log_det`.
  Matrix forward(const Matrix& x, Vector& log_det) const;
  Matrix inverse(const Matrix& y) const;
  /// Per-layer log-determinants (n x layers).
  Matrix layer_log_dets(const Matrix& x) const;
};

/// Identity-initialized flow (last layer of every net is zero).
FlowModel init_flow(std::size_t d, const FlowConfig& config, Rng& rng);

FlowModel fit_flow(const Matrix& x, const FlowConfig& config, const models::TrainConfig& cfg);

/// -log p(x).
Vector flow_novelty(const FlowModel& model, const Matrix& x);

}  // namespace tabood::density
