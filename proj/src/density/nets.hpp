#pragma once

#include "tabood/models/config.hpp"
#include "tabood/numerics/autodiff.hpp"
#include "tabood/numerics/rng.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace tabood::density::nets {

/// Dense stack [W0, b0, W1, b1, ...] for layer sizes sizes[0] -> ... -> sizes.back().
std::vector<Matrix> init_mlp(const std::vector<Eigen::Index>& sizes, Rng& rng, bool zero_last = false);

/// ReLU between layers, linear output.
ad::Var mlp_graph(std::span<const ad::Var> params, ad::Var x);
Matrix mlp_eval(const std::vector<Matrix>& params, const Matrix& x);

using BatchLoss = std::function<ad::Var(ad::Tape&, std::span<const ad::Var> params, const Matrix& batch,
                                        Rng& noise)>;

/// Shuffled mini-batch AdamW over the rows of `x`; returns the mean loss
/// per epoch. Throws DivergedTraining on a non-finite loss.
std::vector<double> train(std::vector<Matrix*> params, const Matrix& x, const models::TrainConfig& cfg,
                          const BatchLoss& loss, const std::string& what);

}  // namespace tabood::density::nets
