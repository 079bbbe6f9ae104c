#pragma once

#include "tabood/data/dataset.hpp"
#include "tabood/data/standardizer.hpp"
#include "tabood/models/config.hpp"
#include "tabood/numerics/autodiff.hpp"
#include "tabood/numerics/rng.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tabood::models {

/// Which input columns are numeric and which hold category codes.
struct InputLayout {
  std::size_t input_dim = 0;
  IndexVector numeric;
  IndexVector categorical;
  std::vector<int> cardinalities;

  static InputLayout from_schema(const data::Schema& schema);
  /// Width after one-hot encoding the categorical columns.
  Eigen::Index encoded_dim() const;
  /// Sequence length of the FT-Transformer tokenizer (features + class token).
  Eigen::Index token_count() const { return static_cast<Eigen::Index>(input_dim) + 1; }
};

/// Named parameter tensors; order is fixed by the architecture builder.
struct ParameterSet {
  std::vector<std::string> names;
  std::vector<Matrix> values;

  std::size_t size() const { return values.size(); }
  void add(std::string name, Matrix value);
  const Matrix& at(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;
};

/// Post-nonlinearity layer output. `values` stacks `rows_per_sample` rows per
/// input sample (1 for MLP/ResNet, token count for transformer blocks).
struct NamedActivation {
  std::string name;
  Matrix values;
  Eigen::Index rows_per_sample = 1;
};

struct ForwardResult {
  Matrix logits;    // (n, C)
  Matrix features;  // (n, h): input of the final linear layer
  std::vector<NamedActivation> activations;
};

/// Immutable fitted classifier. Inference is batch-independent (batchnorm
/// uses running statistics, dropout is off).
class TrainedClassifier {
public:
  TrainedClassifier(ArchitectureConfig arch, InputLayout layout, ParameterSet params,
                    ParameterSet buffers, std::optional<data::Standardizer> standardizer = {});

  ForwardResult forward_with_features(const Matrix& batch) const;
  Matrix logits(const Matrix& batch) const;
  /// Applies the final linear layer to penultimate features.
  Matrix logits_from_features(const Matrix& features) const;

  /// Gradient of sum(objective(logits)) with respect to the numeric input
  /// columns; categorical columns get zero.
  Matrix input_gradient(const Matrix& batch,
                        const std::function<ad::Var(ad::Var logits)>& objective) const;

  /// Final linear layer, stored (h x C) so that logits = z W + b.
  const Matrix& head_weight() const;
  RowVector head_bias() const;

  std::size_t input_dim() const { return layout_.input_dim; }
  int num_classes() const { return arch_.num_classes; }
  Eigen::Index feature_dim() const { return head_weight().rows(); }

  const ArchitectureConfig& arch() const { return arch_; }
  const InputLayout& layout() const { return layout_; }
  const ParameterSet& parameters() const { return params_; }
  const ParameterSet& buffers() const { return buffers_; }
  const std::optional<data::Standardizer>& standardizer() const { return standardizer_; }
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }
  void set_epoch_losses(std::vector<double> losses) { epoch_losses_ = std::move(losses); }

  /// Copy with the final linear layer replaced (used by weight-masking detectors).
  TrainedClassifier with_head(Matrix weight, RowVector bias) const;

private:
  void check_batch(const Matrix& batch) const;

  ArchitectureConfig arch_;
  InputLayout layout_;
  ParameterSet params_;
  ParameterSet buffers_;
  std::optional<data::Standardizer> standardizer_;
  std::vector<double> epoch_losses_;
};

/// Random initialization for an architecture (PyTorch-style uniform ranges).
TrainedClassifier init_classifier(const ArchitectureConfig& arch, const InputLayout& layout, Rng& rng);

/// Cross-entropy training with shuffled mini-batches and AdamW. The dataset is
/// used as given (standardize beforehand); `standardizer` is only recorded.
TrainedClassifier train_classifier(const data::Dataset& ds, ArchitectureConfig arch,
                                   const TrainConfig& cfg,
                                   std::optional<data::Standardizer> standardizer = {});

/// Softmax of logits, row-wise.
Matrix predict_proba(const TrainedClassifier& model, const Matrix& batch);

}  // namespace tabood::models
