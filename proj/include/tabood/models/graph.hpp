#pragma once

// Differentiable forward graphs for the classifier architectures. Used by
// training and by gradient-based checks; detectors normally go through
// TrainedClassifier.

#include "tabood/models/classifier.hpp"
#include "tabood/numerics/rng.hpp"

namespace tabood::models {

enum class Mode { train, eval };

struct GraphOutputs {
  ad::Var logits;
  ad::Var features;
  struct Activation {
    std::string name;
    ad::Var values;
    Eigen::Index rows_per_sample;
  };
  std::vector<Activation> activations;
};

struct GraphContext {
  ad::Tape& tape;
  /// One Var per entry of the ParameterSet, in order.
  const std::vector<ad::Var>& params;
  const ParameterSet& names;
  Mode mode = Mode::eval;
  /// Dropout masks; required when mode == train and dropout > 0.
  Rng* rng = nullptr;
  /// Running statistics; updated in train mode.
  ParameterSet* buffers = nullptr;

  ad::Var param(const std::string& name) const { return params[names.index_of(name)]; }
};

/// Builds logits/features/activations. `numeric` is the (n x numeric-columns)
/// input Var; category codes are read from `batch`.
GraphOutputs build_graph(const ArchitectureConfig& arch, const InputLayout& layout, GraphContext& ctx,
                         ad::Var numeric, const Matrix& batch);

ParameterSet init_parameters(const ArchitectureConfig& arch, const InputLayout& layout, Rng& rng);
ParameterSet init_buffers(const ArchitectureConfig& arch);

/// FT-Transformer tokenizer: one token per numeric feature (x_j * W_j + B_j),
/// one per categorical feature (embedding row + bias), class token last.
/// Output stacks token_count rows per sample.
ad::Var tokenize(ad::Var numeric, ad::Var num_weight, ad::Var num_bias, std::optional<ad::Var> cat_embedding,
                 std::optional<ad::Var> cat_bias, ad::Var cls, const std::vector<std::vector<Eigen::Index>>& codes,
                 const std::vector<Eigen::Index>& cat_offsets);

}  // namespace tabood::models
