#include "layers.hpp"

#include <cmath>
#include <numeric>

namespace tabood::models::layers {

namespace {

std::string block_name(int b) { return "block." + std::to_string(b); }

IndexVector column_range(Eigen::Index begin, Eigen::Index count) {
  IndexVector cols(static_cast<std::size_t>(count));
  std::iota(cols.begin(), cols.end(), begin);
  return cols;
}

ad::Var attention(const ArchitectureConfig& arch, const GraphContext& ctx, ad::Var x, Eigen::Index samples,
                  const std::string& prefix) {
  ad::Var q = dense(ctx, x, prefix + ".q");
  ad::Var k = dense(ctx, x, prefix + ".k");
  ad::Var v = dense(ctx, x, prefix + ".v");
  const Eigen::Index dh = arch.token_dim / arch.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  ad::Var merged;
  for (int h = 0; h < arch.heads; ++h) {
    const IndexVector cols = column_range(h * dh, dh);
    ad::Var scores = ad::batched_matmul_nt(ad::select_cols(q, cols), ad::select_cols(k, cols), samples);
    ad::Var weights = ad::softmax_rows(scale * scores);
    ad::Var head = ad::batched_matmul(weights, ad::select_cols(v, cols), samples);
    merged = h == 0 ? head : ad::hcat(merged, head);
  }
  return dense(ctx, merged, prefix + ".o");
}

}  // namespace

void init_ft_transformer(const ArchitectureConfig& arch, const InputLayout& layout, ParameterSet& p, Rng& rng) {
  const Eigen::Index dt = arch.token_dim;
  const double tok_bound = 1.0 / std::sqrt(static_cast<double>(dt));
  const auto n_num = static_cast<Eigen::Index>(layout.numeric.size());
  p.add("tok.num_weight", uniform(rng, n_num, dt, tok_bound));
  p.add("tok.num_bias", uniform(rng, n_num, dt, tok_bound));
  if (!layout.categorical.empty()) {
    Eigen::Index total = 0;
    for (int c : layout.cardinalities) total += c;
    p.add("tok.cat_embedding", uniform(rng, total, dt, tok_bound));
    p.add("tok.cat_bias", uniform(rng, static_cast<Eigen::Index>(layout.categorical.size()), dt, tok_bound));
  }
  p.add("tok.cls", uniform(rng, 1, dt, tok_bound));
  const Eigen::Index ffn = dt * arch.ffn_factor;
  for (int b = 0; b < arch.depth; ++b) {
    const std::string name = block_name(b);
    if (b > 0) add_norm(p, name + ".ln1", dt);
    for (const char* proj : {".attn.q", ".attn.k", ".attn.v", ".attn.o"}) add_dense(p, rng, name + proj, dt, dt);
    add_norm(p, name + ".ln2", dt);
    add_dense(p, rng, name + ".ffn1", dt, ffn);
    add_dense(p, rng, name + ".ffn2", ffn, dt);
  }
  add_norm(p, "head.ln", dt);
  add_dense(p, rng, "head", dt, arch.num_classes);
}

GraphOutputs build_ft_transformer(const ArchitectureConfig& arch, const InputLayout& layout,
                                  GraphContext& ctx, ad::Var numeric, const Matrix& batch) {
  const Eigen::Index n = batch.rows();
  const Eigen::Index tokens = layout.token_count();

  std::vector<std::vector<Eigen::Index>> codes;
  std::vector<Eigen::Index> offsets;
  std::optional<ad::Var> cat_embedding, cat_bias;
  if (!layout.categorical.empty()) {
    Eigen::Index offset = 0;
    for (int c : layout.cardinalities) {
      offsets.push_back(offset);
      offset += c;
    }
    codes.assign(static_cast<std::size_t>(n), std::vector<Eigen::Index>(layout.categorical.size()));
    for (Eigen::Index i = 0; i < n; ++i)
      for (std::size_t c = 0; c < layout.categorical.size(); ++c)
        codes[i][c] = static_cast<Eigen::Index>(batch(i, layout.categorical[c]));
    cat_embedding = ctx.param("tok.cat_embedding");
    cat_bias = ctx.param("tok.cat_bias");
  }
  ad::Var x = tokenize(numeric, ctx.param("tok.num_weight"), ctx.param("tok.num_bias"), cat_embedding, cat_bias,
                       ctx.param("tok.cls"), codes, offsets);

  GraphOutputs out;
  for (int b = 0; b < arch.depth; ++b) {
    const std::string name = block_name(b);
    ad::Var a = b == 0 ? x : layer_norm(ctx, x, name + ".ln1");
    a = attention(arch, ctx, a, n, name + ".attn");
    x = x + dropout(ctx, a, arch.dropout);
    ad::Var f = ad::relu(dense(ctx, layer_norm(ctx, x, name + ".ln2"), name + ".ffn1"));
    out.activations.push_back({name + ".ffn.relu", f, tokens});
    f = dense(ctx, dropout(ctx, f, arch.dropout), name + ".ffn2");
    x = x + dropout(ctx, f, arch.dropout);
  }
  IndexVector cls_rows(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) cls_rows[i] = i * tokens + tokens - 1;
  ad::Var z = ad::relu(layer_norm(ctx, ad::take_rows(x, cls_rows), "head.ln"));
  out.activations.push_back({"head.relu", z, 1});
  out.features = z;
  out.logits = dense(ctx, z, "head");
  return out;
}

}  // namespace tabood::models::layers
