#include "layers.hpp"

namespace tabood::models::layers {

namespace {
std::string block_name(int b) { return "block." + std::to_string(b); }
}  // namespace

void init_resnet(const ArchitectureConfig& arch, const InputLayout& layout, ParameterSet& p, Rng& rng) {
  add_dense(p, rng, "stem", layout.encoded_dim(), arch.width);
  for (int b = 0; b < arch.depth; ++b) {
    const std::string name = block_name(b);
    add_norm(p, name + ".bn", arch.width);
    add_dense(p, rng, name + ".fc1", arch.width, arch.width);
    add_dense(p, rng, name + ".fc2", arch.width, arch.width);
  }
  add_norm(p, "head.bn", arch.width);
  add_dense(p, rng, "head", arch.width, arch.num_classes);
}

GraphOutputs build_resnet(const ArchitectureConfig& arch, const InputLayout& layout, GraphContext& ctx,
                          ad::Var numeric, const Matrix& batch) {
  GraphOutputs out;
  ad::Var x = dense(ctx, encode_one_hot(ctx.tape, numeric, layout, batch), "stem");
  for (int b = 0; b < arch.depth; ++b) {
    const std::string name = block_name(b);
    ad::Var r = batch_norm(ctx, x, name + ".bn");
    r = ad::relu(dense(ctx, r, name + ".fc1"));
    out.activations.push_back({name + ".relu", r, 1});
    r = dropout(ctx, r, arch.dropout);
    r = dropout(ctx, dense(ctx, r, name + ".fc2"), arch.dropout);
    x = x + arch.residual_scale * r;
  }
  ad::Var z = ad::relu(batch_norm(ctx, x, "head.bn"));
  out.activations.push_back({"head.relu", z, 1});
  out.features = z;
  out.logits = dense(ctx, z, "head");
  return out;
}

}  // namespace tabood::models::layers
