#include "tabood/models/config.hpp"

#include "tabood/error.hpp"

namespace tabood::models {

std::string to_string(ArchKind kind) {
  switch (kind) {
    case ArchKind::mlp: return "mlp";
    case ArchKind::resnet: return "resnet";
    case ArchKind::ft_transformer: return "ft_transformer";
  }
  return "unknown";
}

ArchKind parse_arch(const std::string& text) {
  if (text == "mlp") return ArchKind::mlp;
  if (text == "resnet") return ArchKind::resnet;
  if (text == "ft_transformer" || text == "ft-transformer" || text == "ft") return ArchKind::ft_transformer;
  throw InvalidArgument("unknown architecture '" + text + "'");
}

ArchitectureConfig ArchitectureConfig::defaults(ArchKind kind) {
  ArchitectureConfig a;
  a.kind = kind;
  return a;
}

void ArchitectureConfig::validate() const {
  if (width < 1 || depth < 1 || heads < 1 || token_dim < 1 || ffn_factor < 1)
    throw InvalidArgument("architecture: width, depth, heads, token_dim and ffn_factor must be >= 1");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("architecture: dropout must be in [0, 1)");
  if (kind == ArchKind::ft_transformer && token_dim % heads != 0)
    throw InvalidArgument("architecture: token_dim must be divisible by heads");
  if (num_classes < 0 || num_classes == 1) throw InvalidArgument("architecture: need at least two classes");
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidArgument("train config: epochs must be >= 1");
  if (batch_size < 1) throw InvalidArgument("train config: batch size must be >= 1");
  if (!(lr > 0)) throw InvalidArgument("train config: learning rate must be positive");
}

}  // namespace tabood::models
