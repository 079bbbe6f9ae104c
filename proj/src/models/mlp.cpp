#include "layers.hpp"

namespace tabood::models::layers {

void init_mlp(const ArchitectureConfig& arch, const InputLayout& layout, ParameterSet& p, Rng& rng) {
  Eigen::Index in = layout.encoded_dim();
  for (int l = 0; l < arch.depth; ++l) {
    add_dense(p, rng, "mlp." + std::to_string(l), in, arch.width);
    in = arch.width;
  }
  add_dense(p, rng, "head", in, arch.num_classes);
}

GraphOutputs build_mlp(const ArchitectureConfig& arch, const InputLayout& layout, GraphContext& ctx,
                       ad::Var numeric, const Matrix& batch) {
  GraphOutputs out;
  ad::Var h = encode_one_hot(ctx.tape, numeric, layout, batch);
  for (int l = 0; l < arch.depth; ++l) {
    const std::string name = "mlp." + std::to_string(l);
    h = ad::relu(dense(ctx, h, name));
    out.activations.push_back({name + ".relu", h, 1});
    h = dropout(ctx, h, arch.dropout);
  }
  out.features = h;
  out.logits = dense(ctx, h, "head");
  return out;
}

}  // namespace tabood::models::layers
