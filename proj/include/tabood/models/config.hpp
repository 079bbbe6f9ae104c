#pragma once

#include "tabood/numerics/adamw.hpp"

#include <cstdint>
#include <string>

namespace tabood::models {

enum class ArchKind { mlp, resnet, ft_transformer };

std::string to_string(ArchKind kind);
/// Accepts "mlp", "resnet", "ft_transformer" (also "ft-transformer", "ft").
ArchKind parse_arch(const std::string& text);

struct ArchitectureConfig {
  ArchKind kind = ArchKind::mlp;
  /// Hidden width (MLP layers, ResNet main width).
  int width = 256;
  /// Hidden layers (MLP), residual blocks (ResNet) or transformer blocks.
  int depth = 3;
  double dropout = 0.1;
  /// FT-Transformer only.
  int token_dim = 64;
  int heads = 8;
  /// FFN hidden size as a multiple of token_dim.
  int ffn_factor = 2;
  /// ResNet only: x + residual_scale * block(x).
  double residual_scale = 1.0;
  /// 0 = infer from training labels.
  int num_classes = 0;

  /// Defaults: MLP 3x256, ResNet 3 blocks x 256, FT-Transformer 3 blocks of
  /// 64-dim tokens with 8 heads; dropout 0.1 everywhere.
  static ArchitectureConfig defaults(ArchKind kind);
  void validate() const;
};

struct TrainConfig {
  int epochs = 10;
  int batch_size = 64;
  double lr = 1e-3;
  double weight_decay = 0.0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
  AdamWConfig adamw() const { return AdamWConfig{lr, beta1, beta2, eps, weight_decay}; }
};

}  // namespace tabood::models
