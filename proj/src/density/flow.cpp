#include "tabood/density/flow.hpp"

#include "nets.hpp"
#include "tabood/error.hpp"

#include <cmath>
#include <numbers>

namespace tabood::density {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

struct LayerTerms {
  Matrix s;
  Matrix t;
};

LayerTerms coupling_terms(const CouplingLayer& layer, double max_scale, const Matrix& x) {
  const Matrix xm = x.array().rowwise() * layer.mask.array();
  const RowVector free = (1.0 - layer.mask.array()).matrix();
  LayerTerms out;
  out.s = (nets::mlp_eval(layer.scale_net, xm).array().tanh() * max_scale).rowwise() * free.array();
  out.t = nets::mlp_eval(layer.shift_net, xm).array().rowwise() * free.array();
  return out;
}

void check_dim(const FlowModel& m, const Matrix& x) {
  if (m.layers.empty()) throw InvalidArgument("flow: model has no layers");
  if (static_cast<std::size_t>(x.cols()) != m.dim()) throw InvalidArgument("flow: dimension mismatch");
}

}  // namespace

Matrix FlowModel::forward(const Matrix& x, Vector& log_det) const {
  check_dim(*this, x);
  if (log_det.size() != x.rows()) log_det = Vector::Zero(x.rows());
  Matrix y = x;
  for (const CouplingLayer& layer : layers) {
    const LayerTerms st = coupling_terms(layer, config.max_scale, y);
    y = (y.array() * st.s.array().exp() + st.t.array()).matrix();
    log_det += st.s.rowwise().sum();
  }
  return y;
}

Matrix FlowModel::inverse(const Matrix& y) const {
  check_dim(*this, y);
  Matrix x = y;
  for (auto it = layers.rbegin(); it != layers.rend(); ++it) {
    // the conditioning coordinates are unchanged by the layer
    const LayerTerms st = coupling_terms(*it, config.max_scale, x);
    x = ((x - st.t).array() * (-st.s.array()).exp()).matrix();
  }
  return x;
}

Matrix FlowModel::layer_log_dets(const Matrix& x) const {
  check_dim(*this, x);
  Matrix out(x.rows(), static_cast<Eigen::Index>(layers.size()));
  Matrix y = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerTerms st = coupling_terms(layers[l], config.max_scale, y);
    y = (y.array() * st.s.array().exp() + st.t.array()).matrix();
    out.col(static_cast<Eigen::Index>(l)) = st.s.rowwise().sum();
  }
  return out;
}

FlowModel init_flow(std::size_t d, const FlowConfig& config, Rng& rng) {
  if (d < 2) throw InvalidArgument("flow: needs at least two dimensions");
  if (config.layers < 1 || config.hidden_width < 1 || !(config.max_scale > 0))
    throw InvalidArgument("flow: bad configuration");
  const auto dim = static_cast<Eigen::Index>(d);
  const Eigen::Index half = dim / 2;
  const std::vector<Eigen::Index> sizes{dim, config.hidden_width, config.hidden_width, dim};
  FlowModel m;
  m.config = config;
  for (int l = 0; l < config.layers; ++l) {
    CouplingLayer layer;
    layer.mask = RowVector::Zero(dim);
    if (l % 2 == 0)
      layer.mask.head(half).setOnes();
    else
      layer.mask.tail(dim - half).setOnes();
    layer.scale_net = nets::init_mlp(sizes, rng, true);
    layer.shift_net = nets::init_mlp(sizes, rng, true);
    m.layers.push_back(std::move(layer));
  }
  return m;
}

FlowModel fit_flow(const Matrix& x, const FlowConfig& config, const models::TrainConfig& cfg) {
  Rng rng(mix_seed(cfg.seed, 0));
  FlowModel m = init_flow(static_cast<std::size_t>(x.cols()), config, rng);
  std::vector<Matrix*> params;
  for (CouplingLayer& layer : m.layers) {
    for (Matrix& p : layer.scale_net) params.push_back(&p);
    for (Matrix& p : layer.shift_net) params.push_back(&p);
  }
  const std::size_t per_net = m.layers.front().scale_net.size();
  const double max_scale = config.max_scale;
  const std::vector<CouplingLayer>& layers = m.layers;

  auto loss = [&](ad::Tape& tape, std::span<const ad::Var> v, const Matrix& batch, Rng&) {
    ad::Var y = tape.constant(batch);
    ad::Var log_det = tape.constant(Matrix::Zero(batch.rows(), 1));
    for (std::size_t l = 0; l < layers.size(); ++l) {
      ad::Var mask = tape.constant(layers[l].mask);
      ad::Var free = tape.constant((1.0 - layers[l].mask.array()).matrix());
      ad::Var ym = ad::mul_row(y, mask);
      ad::Var s = ad::mul_row(max_scale * ad::tanh(nets::mlp_graph(v.subspan(2 * l * per_net, per_net), ym)), free);
      ad::Var t = ad::mul_row(nets::mlp_graph(v.subspan((2 * l + 1) * per_net, per_net), ym), free);
      y = ad::mul(y, ad::exp(s)) + t;
      log_det = log_det + ad::row_sum(s);
    }
    const double n = static_cast<double>(batch.rows());
    ad::Var nll = (0.5 / n) * ad::sum(ad::square(y)) - (1.0 / n) * ad::sum(log_det);
    return ad::add_scalar(nll, 0.5 * static_cast<double>(batch.cols()) * kLog2Pi);
  };
  m.epoch_losses = nets::train(params, x, cfg, loss, "Flow");
  return m;
}

Vector flow_novelty(const FlowModel& model, const Matrix& x) {
  Vector log_det = Vector::Zero(x.rows());
  const Matrix y = model.forward(x, log_det);
  const double d = static_cast<double>(x.cols());
  return (0.5 * y.rowwise().squaredNorm().array() + 0.5 * d * kLog2Pi - log_det.array()).matrix();
}

}  // namespace tabood::density
