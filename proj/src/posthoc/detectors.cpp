#include "tabood/posthoc/detectors.hpp"

#include "tabood/error.hpp"
#include "tabood/models/checkpoint.hpp"
#include "tabood/numerics/ops.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace tabood::posthoc {

using nlohmann::json;
using models::ForwardResult;
using models::TrainedClassifier;
using models::matrix_to_json;

namespace {

const std::vector<std::pair<Method, std::string>>& method_names() {
  static const std::vector<std::pair<Method, std::string>> names = {
      {Method::msp, "MSP"},         {Method::mls, "MLS"},       {Method::tempscale, "TempScale"},
      {Method::odin, "ODIN"},       {Method::ebo, "EBO"},       {Method::mds, "MDS"},
      {Method::rmds, "RMDS"},       {Method::knn, "KNN"},       {Method::vim, "VIM"},
      {Method::she, "SHE"},         {Method::klm, "KLM"},       {Method::openmax, "OpenMax"},
      {Method::gram, "GRAM"},       {Method::gradnorm, "GradNorm"}, {Method::react, "ReAct"},
      {Method::dice, "DICE"},       {Method::ash, "ASH"}};
  return names;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

template <typename State>
class StateDetector final : public PosthocDetector {
public:
  using Scorer = std::function<Vector(const State&, const TrainedClassifier&, const Matrix&, const ForwardResult&)>;
  using Serializer = std::function<json(const State&)>;

  StateDetector(std::shared_ptr<const TrainedClassifier> model, Method method, json params, State state,
                Scorer scorer, Serializer serializer)
      : PosthocDetector(std::move(model)),
        method_(method),
        params_(std::move(params)),
        state_(std::move(state)),
        scorer_(std::move(scorer)),
        serializer_(std::move(serializer)) {}

  std::string name() const override { return to_string(method_); }
  json params() const override { return params_; }
  json artifacts() const override { return serializer_(state_); }
  Vector score_forward(const Matrix& x, const ForwardResult& forward) const override {
    if (forward.logits.rows() != x.rows()) throw InvalidArgument(name() + ": forward pass does not match input");
    return scorer_(state_, *model_, x, forward);
  }

private:
  Method method_;
  json params_;
  State state_;
  Scorer scorer_;
  Serializer serializer_;
};

struct Empty {};

template <typename State>
std::unique_ptr<PosthocDetector> make(std::shared_ptr<const TrainedClassifier> model, Method m, json params,
                                      State state, typename StateDetector<State>::Scorer scorer,
                                      typename StateDetector<State>::Serializer serializer) {
  return std::make_unique<StateDetector<State>>(std::move(model), m, std::move(params), std::move(state),
                                                std::move(scorer), std::move(serializer));
}

json no_state(const Empty&) { return json::object(); }

}  // namespace

std::string to_string(Method m) {
  for (const auto& [k, v] : method_names())
    if (k == m) return v;
  return "unknown";
}

Method parse_method(const std::string& text) {
  for (const auto& [k, v] : method_names())
    if (lower(v) == lower(text)) return k;
  throw InvalidArgument("unknown post-hoc method '" + text + "'");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> all = [] {
    std::vector<Method> v;
    for (const auto& [k, name] : method_names()) v.push_back(k);
    return v;
  }();
  return all;
}

bool needs_validation(Method m) {
  switch (m) {
    case Method::tempscale:
    case Method::odin:
    case Method::klm:
    case Method::openmax:
    case Method::gram:
    case Method::react:
    case Method::dice: return true;
    default: return false;
  }
}

FitData prepare_fit_data(const TrainedClassifier& model, const data::Dataset& id_train, const data::Dataset& id_val) {
  FitData f;
  f.train = model.forward_with_features(id_train.features);
  f.train_labels = id_train.labels;
  f.val = model.forward_with_features(id_val.features);
  f.val_labels = id_val.labels;
  return f;
}

std::unique_ptr<PosthocDetector> fit_posthoc(Method method, std::shared_ptr<const TrainedClassifier> model,
                                             const data::Dataset& id_train, const data::Dataset& id_val,
                                             const PosthocOptions& options) {
  if (!model) throw InvalidArgument("fit_posthoc: null model");
  return fit_posthoc(method, model, prepare_fit_data(*model, id_train, id_val), options);
}

std::unique_ptr<PosthocDetector> fit_posthoc(Method method, std::shared_ptr<const TrainedClassifier> model,
                                             const FitData& fit, const PosthocOptions& o) {
  if (!model) throw InvalidArgument("fit_posthoc: null model");
  if (fit.train.logits.rows() == 0) throw InvalidArgument("fit_posthoc: empty ID training set");
  if (needs_validation(method) && fit.val.logits.rows() == 0)
    throw InvalidArgument("fit_posthoc: " + to_string(method) + " needs a non-empty ID validation set");
  const int C = model->num_classes();
  const Matrix& W = model->head_weight();
  const RowVector b = model->head_bias();

  switch (method) {
    case Method::msp:
    case Method::mls:
      return make<Empty>(
          model, method, json::object(), {},
          [method](const Empty&, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_confidence(f.logits, method == Method::msp ? Confidence::msp : Confidence::mls);
          },
          no_state);

    case Method::tempscale: {
      const double t = fit_temperature(fit.val.logits, fit.val_labels, o.temperature_min, o.temperature_max);
      return make<double>(
          model, method, {{"t_min", o.temperature_min}, {"t_max", o.temperature_max}}, t,
          [](const double& T, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_confidence(f.logits, Confidence::tempscale, T);
          },
          [](const double& T) { return json{{"temperature", T}}; });
    }

    case Method::ebo:
      return make<double>(
          model, method, {{"temperature", o.ebo_temperature}}, o.ebo_temperature,
          [](const double& T, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return energy(f.logits, T);
          },
          [](const double& T) { return json{{"temperature", T}}; });

    case Method::odin: {
      const std::pair<double, double> te{o.odin_temperature, o.odin_epsilon};
      return make<std::pair<double, double>>(
          model, method, {{"temperature", te.first}, {"epsilon", te.second}}, te,
          [](const std::pair<double, double>& s, const TrainedClassifier& m, const Matrix& x, const ForwardResult&) {
            return score_odin(m, x, s.first, s.second);
          },
          [](const std::pair<double, double>& s) { return json{{"temperature", s.first}, {"epsilon", s.second}}; });
    }

    case Method::mds:
    case Method::rmds: {
      const bool relative = method == Method::rmds;
      ClassStats stats = fit_class_stats(fit.train.features, fit.train_labels, C, relative);
      return make<ClassStats>(
          model, method, {{"covariance_regularization", 1e-6}}, std::move(stats),
          [relative](const ClassStats& s, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_mahalanobis(f.features, s, relative);
          },
          [](const ClassStats& s) {
            json j{{"means", matrix_to_json(s.means)}, {"covariance", matrix_to_json(s.covariance)}};
            if (s.has_background) {
              j["background_mean"] = matrix_to_json(s.background_mean);
              j["background_covariance"] = matrix_to_json(s.background_covariance);
            }
            return j;
          });
    }

    case Method::knn: {
      Matrix bank = o.knn_normalize ? l2_normalize_rows(fit.train.features) : fit.train.features;
      if (o.knn_k < 1 || o.knn_k > bank.rows()) throw InvalidArgument("KNN: k exceeds the feature bank size");
      const int k = o.knn_k;
      const bool normalize = o.knn_normalize;
      return make<Matrix>(
          model, method, {{"k", k}, {"normalize", normalize}}, std::move(bank),
          [k, normalize](const Matrix& bank, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            // the bank is stored normalized already
            return score_knn(normalize ? l2_normalize_rows(f.features) : f.features, bank, k, false);
          },
          [](const Matrix& bank) { return json{{"bank", matrix_to_json(bank)}}; });
    }

    case Method::vim: {
      const Eigen::Index h = fit.train.features.cols();
      const int dim = o.vim_dim > 0 ? o.vim_dim : static_cast<int>(std::max<Eigen::Index>(1, h / 2));
      VimSubspace v = fit_vim(fit.train.features, fit.train.logits, W, b, dim);
      return make<VimSubspace>(
          model, method, {{"dim", dim}}, std::move(v),
          [](const VimSubspace& v, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_vim(f.features, f.logits, v);
          },
          [](const VimSubspace& v) {
            return json{{"origin", matrix_to_json(v.origin)}, {"basis", matrix_to_json(v.basis)}, {"alpha", v.alpha}};
          });
    }

    case Method::she: {
      Matrix patterns = fit_she_patterns(fit.train.features, fit.train.logits, fit.train_labels, C);
      return make<Matrix>(
          model, method, json::object(), std::move(patterns),
          [](const Matrix& p, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_she(f.features, p, argmax_rows(f.logits));
          },
          [](const Matrix& p) { return json{{"patterns", matrix_to_json(p)}}; });
    }

    case Method::klm: {
      Matrix templates = fit_klm_templates(softmax_rows(fit.val.logits), C);
      return make<Matrix>(
          model, method, json::object(), std::move(templates),
          [](const Matrix& t, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_klm(softmax_rows(f.logits), t);
          },
          [](const Matrix& t) { return json{{"templates", matrix_to_json(t)}}; });
    }

    case Method::openmax: {
      const int alpha = o.openmax_alpha > 0 ? o.openmax_alpha : std::min(C, 3);
      OpenMaxModel om = fit_openmax(fit.train.logits, fit.train_labels, C, o.openmax_tail, alpha);
      return make<OpenMaxModel>(
          model, method, {{"tail_size", o.openmax_tail}, {"alpha", alpha}}, std::move(om),
          [](const OpenMaxModel& m, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_openmax(f.logits, m);
          },
          [](const OpenMaxModel& m) {
            json w = json::array();
            for (const Weibull& x : m.weibulls) w.push_back({{"shape", x.shape}, {"scale", x.scale}, {"shift", x.shift}});
            return json{{"mavs", matrix_to_json(m.mavs)}, {"weibulls", w}, {"alpha", m.alpha}};
          });
    }

    case Method::gram: {
      GramRanges r = fit_gram(fit.train.activations, argmax_rows(fit.train.logits), C, o.gram_powers);
      return make<GramRanges>(
          model, method, {{"powers", o.gram_powers}}, std::move(r),
          [](const GramRanges& r, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_gram(f.activations, argmax_rows(f.logits), r);
          },
          [](const GramRanges& r) {
            json layers = json::array();
            for (const auto& per_class : r.ranges) {
              json cls = json::array();
              for (const Matrix& m : per_class) cls.push_back(matrix_to_json(m));
              layers.push_back(cls);
            }
            return json{{"ranges", layers}, {"powers", r.powers}, {"seen", r.seen}};
          });
    }

    case Method::gradnorm:
      return make<Empty>(
          model, method, json::object(), {},
          [](const Empty&, const TrainedClassifier&, const Matrix&, const ForwardResult& f) {
            return score_gradnorm(f.features, f.logits);
          },
          no_state);

    case Method::react: {
      const Matrix& z = fit.train.features;
      const double c = percentile(std::vector<double>(z.data(), z.data() + z.size()), o.react_percentile);
      return make<double>(
          model, method, {{"percentile", o.react_percentile}}, c,
          [](const double& c, const TrainedClassifier& m, const Matrix&, const ForwardResult& f) {
            return score_react(f.features, c, m.head_weight(), m.head_bias());
          },
          [](const double& c) { return json{{"clamp", c}}; });
    }

    case Method::dice: {
      const RowVector mean = fit.train.features.colwise().mean();
      Matrix masked = dice_mask(W, mean, o.dice_p);
      return make<Matrix>(
          model, method, {{"p", o.dice_p}}, std::move(masked),
          [](const Matrix& w, const TrainedClassifier& m, const Matrix&, const ForwardResult& f) {
            return score_dice(f.features, w, m.head_bias());
          },
          [](const Matrix& w) { return json{{"masked_weight", matrix_to_json(w)}}; });
    }

    case Method::ash: {
      const std::pair<double, AshVariant> s{o.ash_percentile, o.ash_variant};
      if (!(s.first >= 0 && s.first < 100)) throw InvalidArgument("ASH: percentile must be in [0, 100)");
      const std::string variant = s.second == AshVariant::scale ? "scale" : "prune";
      return make<std::pair<double, AshVariant>>(
          model, method, {{"percentile", s.first}, {"variant", variant}}, s,
          [](const std::pair<double, AshVariant>& s, const TrainedClassifier& m, const Matrix&, const ForwardResult& f) {
            return score_ash(f.features, s.first, s.second, m.head_weight(), m.head_bias());
          },
          [variant](const std::pair<double, AshVariant>& s) { return json{{"percentile", s.first}, {"variant", variant}}; });
    }
  }
  throw InvalidArgument("fit_posthoc: unknown method");
}

}  // namespace tabood::posthoc
