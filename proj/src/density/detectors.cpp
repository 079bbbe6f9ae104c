#include "tabood/density/detectors.hpp"

#include "tabood/density/lof.hpp"
#include "tabood/density/ppca.hpp"
#include "tabood/error.hpp"
#include "tabood/models/checkpoint.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace tabood::density {

using nlohmann::json;
using models::matrix_to_json;

namespace {

const std::vector<std::pair<Method, std::string>>& method_names() {
  static const std::vector<std::pair<Method, std::string>> names = {
      {Method::ae, "AE"}, {Method::vae, "VAE"}, {Method::flow, "Flow"}, {Method::ppca, "PPCA"}, {Method::lof, "LOF"}};
  return names;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

json matrices(const std::vector<Matrix>& ms) {
  json out = json::array();
  for (const Matrix& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

json train_params(const models::TrainConfig& t) {
  return {{"epochs", t.epochs}, {"batch_size", t.batch_size}, {"lr", t.lr},
          {"weight_decay", t.weight_decay}, {"seed", t.seed}};
}

template <typename State>
class DensityDetector final : public Detector {
public:
  using Scorer = std::function<Vector(const State&, const Matrix&)>;
  using Serializer = std::function<json(const State&)>;

  DensityDetector(Method m, json params, State state, Scorer scorer, Serializer serializer)
      : method_(m),
        params_(std::move(params)),
        state_(std::move(state)),
        scorer_(std::move(scorer)),
        serializer_(std::move(serializer)) {}

  std::string name() const override { return to_string(method_); }
  json params() const override { return params_; }
  json artifacts() const override { return serializer_(state_); }
  Vector score(const Matrix& x) const override { return scorer_(state_, x); }

private:
  Method method_;
  json params_;
  State state_;
  Scorer scorer_;
  Serializer serializer_;
};

template <typename State>
std::unique_ptr<Detector> make(Method m, json params, State state, typename DensityDetector<State>::Scorer scorer,
                               typename DensityDetector<State>::Serializer serializer) {
  return std::make_unique<DensityDetector<State>>(m, std::move(params), std::move(state), std::move(scorer),
                                                  std::move(serializer));
}

int default_components(Eigen::Index d) { return static_cast<int>(std::clamp<Eigen::Index>(d / 2, 1, 16)); }

}  // namespace

std::string to_string(Method m) {
  for (const auto& [method, name] : method_names())
    if (method == m) return name;
  throw InvalidArgument("unknown density method");
}

Method parse_method(const std::string& text) {
  const std::string key = lower(text);
  for (const auto& [method, name] : method_names())
    if (lower(name) == key) return method;
  throw InvalidArgument("unknown density method: " + text);
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods = {Method::ae, Method::vae, Method::flow, Method::ppca, Method::lof};
  return methods;
}

std::unique_ptr<Detector> fit_density(Method method, const Matrix& x, const DensityOptions& options) {
  if (x.rows() < 2 || x.cols() < 1) throw InvalidArgument("fit_density: not enough data");
  if (!x.allFinite()) throw InvalidArgument("fit_density: non-finite input");
  switch (method) {
    case Method::ae:
    case Method::vae: {
      AutoencoderConfig cfg = options.autoencoder;
      cfg.variational = method == Method::vae;
      AutoencoderModel model = fit_autoencoder(x, cfg, options.train);
      json params = {{"latent", model.latent}, {"hidden_width", cfg.hidden_width},
                     {"hidden_layers", cfg.hidden_layers}, {"train", train_params(options.train)}};
      if (cfg.variational) {
        params["mc_samples"] = cfg.mc_samples;
        params["score_seed"] = cfg.score_seed;
      }
      return make<AutoencoderModel>(
          method, std::move(params), std::move(model),
          [](const AutoencoderModel& m, const Matrix& q) {
            return m.config.variational ? vae_novelty(m, q, m.config.mc_samples, m.config.score_seed)
                                        : ae_novelty(m, q);
          },
          [](const AutoencoderModel& m) {
            return json{{"encoder", matrices(m.encoder)}, {"decoder", matrices(m.decoder)}};
          });
    }
    case Method::flow: {
      FlowModel model = fit_flow(x, options.flow, options.train);
      json params = {{"layers", options.flow.layers}, {"hidden_width", options.flow.hidden_width},
                     {"max_scale", options.flow.max_scale}, {"train", train_params(options.train)}};
      return make<FlowModel>(
          method, std::move(params), std::move(model), [](const FlowModel& m, const Matrix& q) { return flow_novelty(m, q); },
          [](const FlowModel& m) {
            json layers = json::array();
            for (const CouplingLayer& l : m.layers)
              layers.push_back({{"mask", matrix_to_json(l.mask)},
                                {"scale_net", matrices(l.scale_net)},
                                {"shift_net", matrices(l.shift_net)}});
            return layers;
          });
    }
    case Method::ppca: {
      const int q = options.ppca_components > 0 ? options.ppca_components : default_components(x.cols());
      PpcaModel model = fit_ppca(x, q);
      return make<PpcaModel>(
          method, json{{"components", q}}, std::move(model),
          [](const PpcaModel& m, const Matrix& xs) { return ppca_novelty(m, xs); },
          [](const PpcaModel& m) {
            return json{{"mean", matrix_to_json(m.mean)}, {"loadings", matrix_to_json(m.loadings)},
                        {"sigma2", m.sigma2},
                        {"eigenvalues", matrix_to_json(m.eigenvalues)},
                        {"eigenvectors", matrix_to_json(m.eigenvectors)}};
          });
    }
    case Method::lof: {
      const int k = std::min<int>(options.lof_k, static_cast<int>(x.rows()) - 1);
      NeighborIndex index = build_neighbor_index(x, k);
      return make<NeighborIndex>(
          method, json{{"k", k}}, std::move(index),
          [](const NeighborIndex& m, const Matrix& q) { return lof_novelty(m, q); },
          [](const NeighborIndex& m) {
            return json{{"k", m.k}, {"points_hash", fnv1a(matrix_to_json(m.points).dump())},
                        {"k_distance", matrix_to_json(m.k_distance)}, {"lrd", matrix_to_json(m.lrd)}};
          });
    }
  }
  throw InvalidArgument("fit_density: unknown method");
}

}  // namespace tabood::density
