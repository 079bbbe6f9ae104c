#include "tabood/models/graph.hpp"

#include "layers.hpp"
#include "tabood/error.hpp"

namespace tabood::models {

GraphOutputs build_graph(const ArchitectureConfig& arch, const InputLayout& layout, GraphContext& ctx,
                         ad::Var numeric, const Matrix& batch) {
  switch (arch.kind) {
    case ArchKind::mlp: return layers::build_mlp(arch, layout, ctx, numeric, batch);
    case ArchKind::resnet: return layers::build_resnet(arch, layout, ctx, numeric, batch);
    case ArchKind::ft_transformer: return layers::build_ft_transformer(arch, layout, ctx, numeric, batch);
  }
  throw InvalidArgument("build_graph: unknown architecture");
}

ParameterSet init_parameters(const ArchitectureConfig& arch, const InputLayout& layout, Rng& rng) {
  arch.validate();
  if (arch.num_classes < 2) throw InvalidArgument("init_parameters: num_classes must be set");
  ParameterSet p;
  switch (arch.kind) {
    case ArchKind::mlp: layers::init_mlp(arch, layout, p, rng); break;
    case ArchKind::resnet: layers::init_resnet(arch, layout, p, rng); break;
    case ArchKind::ft_transformer: layers::init_ft_transformer(arch, layout, p, rng); break;
  }
  return p;
}

ParameterSet init_buffers(const ArchitectureConfig& arch) {
  ParameterSet b;
  if (arch.kind == ArchKind::resnet) {
    for (int i = 0; i < arch.depth; ++i) layers::add_running_stats(b, "block." + std::to_string(i) + ".bn", arch.width);
    layers::add_running_stats(b, "head.bn", arch.width);
  }
  return b;
}

ad::Var tokenize(ad::Var numeric, ad::Var num_weight, ad::Var num_bias, std::optional<ad::Var> cat_embedding,
                 std::optional<ad::Var> cat_bias, ad::Var cls, const std::vector<std::vector<Eigen::Index>>& codes,
                 const std::vector<Eigen::Index>& cat_offsets) {
  const Matrix& x = numeric.value();
  const Matrix& w = num_weight.value();
  const Matrix& bn = num_bias.value();
  const Eigen::Index n = x.rows();
  const Eigen::Index n_num = x.cols();
  const Eigen::Index dt = cls.cols();
  const Eigen::Index n_cat = static_cast<Eigen::Index>(cat_offsets.size());
  if (w.rows() != n_num || bn.rows() != n_num || (n_num > 0 && (w.cols() != dt || bn.cols() != dt)) ||
      cls.rows() != 1)
    throw InvalidArgument("tokenize: numeric tokenizer shape mismatch");
  if (n_cat > 0) {
    if (!cat_embedding || !cat_bias || cat_bias->rows() != n_cat || cat_bias->cols() != dt ||
        cat_embedding->cols() != dt || static_cast<Eigen::Index>(codes.size()) != n)
      throw InvalidArgument("tokenize: categorical tokenizer shape mismatch");
  }
  const Eigen::Index tokens = n_num + n_cat + 1;

  Matrix out(n * tokens, dt);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index base = i * tokens;
    for (Eigen::Index j = 0; j < n_num; ++j) out.row(base + j) = x(i, j) * w.row(j) + bn.row(j);
    for (Eigen::Index c = 0; c < n_cat; ++c) {
      const Eigen::Index row = cat_offsets[c] + codes[i][c];
      if (codes[i][c] < 0 || row >= cat_embedding->rows()) throw InvalidArgument("tokenize: category code out of range");
      out.row(base + n_num + c) = cat_embedding->value().row(row) + cat_bias->value().row(c);
    }
    out.row(base + tokens - 1) = cls.value().row(0);
  }

  std::vector<ad::Var> parents{numeric, num_weight, num_bias, cls};
  if (n_cat > 0) {
    parents.push_back(*cat_embedding);
    parents.push_back(*cat_bias);
  }
  const int ix = numeric.id, iw = num_weight.id, ib = num_bias.id, ic = cls.id;
  const int ie = n_cat > 0 ? cat_embedding->id : -1;
  const int icb = n_cat > 0 ? cat_bias->id : -1;
  return numeric.tape->record(
      std::move(out), parents,
      [=, codes = codes, offsets = cat_offsets](ad::Tape& tp, int self) {
        const Matrix& g = tp.grad_of(self);
        const Matrix& xv = tp.value_of(ix);
        const Matrix& wv = tp.value_of(iw);
        Matrix dx = Matrix::Zero(n, n_num), dw = Matrix::Zero(n_num, dt), db = Matrix::Zero(n_num, dt);
        Matrix dcls = Matrix::Zero(1, dt);
        Matrix de, dcb;
        if (n_cat > 0) {
          de = Matrix::Zero(tp.value_of(ie).rows(), dt);
          dcb = Matrix::Zero(n_cat, dt);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const Eigen::Index base = i * tokens;
          for (Eigen::Index j = 0; j < n_num; ++j) {
            const auto gr = g.row(base + j);
            dx(i, j) = gr.dot(wv.row(j));
            dw.row(j) += xv(i, j) * gr;
            db.row(j) += gr;
          }
          for (Eigen::Index c = 0; c < n_cat; ++c) {
            de.row(offsets[c] + codes[i][c]) += g.row(base + n_num + c);
            dcb.row(c) += g.row(base + n_num + c);
          }
          dcls += g.row(base + tokens - 1);
        }
        tp.accumulate(ix, dx);
        tp.accumulate(iw, dw);
        tp.accumulate(ib, db);
        tp.accumulate(ic, dcls);
        if (n_cat > 0) {
          tp.accumulate(ie, de);
          tp.accumulate(icb, dcb);
        }
      });
}

}  // namespace tabood::models
