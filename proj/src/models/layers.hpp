#pragma once

#include "tabood/models/graph.hpp"

#include <string>

namespace tabood::models::layers {

inline constexpr double kNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

ad::Var dense(const GraphContext& ctx, ad::Var x, const std::string& prefix);
ad::Var dropout(const GraphContext& ctx, ad::Var x, double rate);
ad::Var layer_norm(const GraphContext& ctx, ad::Var x, const std::string& prefix);
/// Batch statistics in train mode (and running-stat update), running stats in eval.
ad::Var batch_norm(GraphContext& ctx, ad::Var x, const std::string& prefix);

// Initializers.
void add_dense(ParameterSet& p, Rng& rng, const std::string& prefix, Eigen::Index in, Eigen::Index out);
void add_norm(ParameterSet& p, const std::string& prefix, Eigen::Index dim);
void add_running_stats(ParameterSet& b, const std::string& prefix, Eigen::Index dim);
Matrix uniform(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound);

/// Numeric input followed by one-hot blocks for the categorical columns.
ad::Var encode_one_hot(ad::Tape& tape, ad::Var numeric, const InputLayout& layout, const Matrix& batch);

GraphOutputs build_mlp(const ArchitectureConfig& arch, const InputLayout& layout, GraphContext& ctx,
                       ad::Var numeric, const Matrix& batch);
GraphOutputs build_resnet(const ArchitectureConfig& arch, const InputLayout& layout, GraphContext& ctx,
                          ad::Var numeric, const Matrix& batch);
GraphOutputs build_ft_transformer(const ArchitectureConfig& arch, const InputLayout& layout,
                                  GraphContext& ctx, ad::Var numeric, const Matrix& batch);

void init_mlp(const ArchitectureConfig& arch, const InputLayout& layout, ParameterSet& p, Rng& rng);
void init_resnet(const ArchitectureConfig& arch, const InputLayout& layout, ParameterSet& p, Rng& rng);
void init_ft_transformer(const ArchitectureConfig& arch, const InputLayout& layout, ParameterSet& p, Rng& rng);

}  // namespace tabood::models::layers
