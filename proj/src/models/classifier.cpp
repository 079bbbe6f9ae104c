#include "tabood/models/classifier.hpp"

#include "tabood/error.hpp"
#include "tabood/models/graph.hpp"
#include "tabood/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

namespace tabood::models {

namespace {

constexpr Eigen::Index kInferenceChunk = 512;

Matrix numeric_columns(const Matrix& batch, const IndexVector& cols) {
  Matrix out(batch.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = batch.col(cols[j]);
  return out;
}

Matrix vstack(const std::vector<Matrix>& parts) {
  Eigen::Index rows = 0;
  for (const Matrix& m : parts) rows += m.rows();
  Matrix out(rows, parts.empty() ? 0 : parts.front().cols());
  Eigen::Index r = 0;
  for (const Matrix& m : parts) {
    out.middleRows(r, m.rows()) = m;
    r += m.rows();
  }
  return out;
}

}  // namespace

InputLayout InputLayout::from_schema(const data::Schema& schema) {
  InputLayout l;
  l.input_dim = schema.size();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (schema[i].is_numeric()) {
      l.numeric.push_back(static_cast<Eigen::Index>(i));
    } else {
      l.categorical.push_back(static_cast<Eigen::Index>(i));
      l.cardinalities.push_back(static_cast<int>(schema[i].categories.size()));
    }
  }
  return l;
}

Eigen::Index InputLayout::encoded_dim() const {
  Eigen::Index d = static_cast<Eigen::Index>(numeric.size());
  for (int c : cardinalities) d += c;
  return d;
}

void ParameterSet::add(std::string name, Matrix value) {
  if (std::find(names.begin(), names.end(), name) != names.end())
    throw InvalidArgument("parameter '" + name + "' defined twice");
  names.push_back(std::move(name));
  values.push_back(std::move(value));
}

std::size_t ParameterSet::index_of(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw InvalidArgument("unknown parameter '" + name + "'");
  return static_cast<std::size_t>(it - names.begin());
}

const Matrix& ParameterSet::at(const std::string& name) const { return values[index_of(name)]; }

TrainedClassifier::TrainedClassifier(ArchitectureConfig arch, InputLayout layout, ParameterSet params,
                                     ParameterSet buffers, std::optional<data::Standardizer> standardizer)
    : arch_(std::move(arch)),
      layout_(std::move(layout)),
      params_(std::move(params)),
      buffers_(std::move(buffers)),
      standardizer_(std::move(standardizer)) {
  arch_.validate();
  if (arch_.num_classes < 2) throw InvalidArgument("TrainedClassifier: need at least two classes");
  const Matrix& w = head_weight();
  if (w.cols() != arch_.num_classes || params_.at("head.bias").cols() != arch_.num_classes)
    throw InvalidArgument("TrainedClassifier: head does not match num_classes");
  if (standardizer_ && standardizer_->dim() != layout_.input_dim)
    throw InvalidArgument("TrainedClassifier: standardizer dimension mismatch");
}

void TrainedClassifier::check_batch(const Matrix& batch) const {
  if (static_cast<std::size_t>(batch.cols()) != layout_.input_dim)
    throw InvalidArgument("classifier expects " + std::to_string(layout_.input_dim) + " features, got " +
                          std::to_string(batch.cols()));
}

ForwardResult TrainedClassifier::forward_with_features(const Matrix& batch) const {
  check_batch(batch);
  std::vector<Matrix> logits, features;
  std::vector<std::vector<Matrix>> acts;
  std::vector<NamedActivation> result_acts;
  ParameterSet buffers = buffers_;
  for (Eigen::Index start = 0; start < batch.rows() || (start == 0 && batch.rows() == 0);
       start += kInferenceChunk) {
    const Eigen::Index len = std::min(kInferenceChunk, batch.rows() - start);
    const Matrix chunk = batch.middleRows(start, len);
    ad::Tape tape;
    std::vector<ad::Var> vars;
    vars.reserve(params_.size());
    for (const Matrix& p : params_.values) vars.push_back(tape.constant(p));
    GraphContext ctx{tape, vars, params_, Mode::eval, nullptr, &buffers};
    GraphOutputs g = build_graph(arch_, layout_, ctx, tape.constant(numeric_columns(chunk, layout_.numeric)), chunk);
    logits.push_back(g.logits.value());
    features.push_back(g.features.value());
    if (acts.empty()) {
      acts.resize(g.activations.size());
      for (const auto& a : g.activations) result_acts.push_back({a.name, Matrix(), a.rows_per_sample});
    }
    for (std::size_t k = 0; k < g.activations.size(); ++k) acts[k].push_back(g.activations[k].values.value());
    if (len == 0) break;
  }
  ForwardResult out;
  out.logits = vstack(logits);
  out.features = vstack(features);
  for (std::size_t k = 0; k < acts.size(); ++k) result_acts[k].values = vstack(acts[k]);
  out.activations = std::move(result_acts);
  return out;
}

Matrix TrainedClassifier::logits(const Matrix& batch) const { return forward_with_features(batch).logits; }

Matrix TrainedClassifier::logits_from_features(const Matrix& features) const {
  const Matrix& w = head_weight();
  if (features.cols() != w.rows()) throw InvalidArgument("logits_from_features: feature width mismatch");
  Matrix out = features * w;
  out.rowwise() += params_.at("head.bias").row(0);
  return out;
}

Matrix TrainedClassifier::input_gradient(const Matrix& batch,
                                         const std::function<ad::Var(ad::Var logits)>& objective) const {
  check_batch(batch);
  ParameterSet buffers = buffers_;
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Matrix& p : params_.values) vars.push_back(tape.constant(p));
  GraphContext ctx{tape, vars, params_, Mode::eval, nullptr, &buffers};
  ad::Var x = tape.variable(numeric_columns(batch, layout_.numeric));
  GraphOutputs g = build_graph(arch_, layout_, ctx, x, batch);
  ad::Var out = objective(g.logits);
  if (out.rows() != 1 || out.cols() != 1) out = ad::sum(out);
  tape.backward(out);
  const Matrix gx = tape.gradient(x);
  Matrix grad = Matrix::Zero(batch.rows(), batch.cols());
  for (std::size_t j = 0; j < layout_.numeric.size(); ++j)
    grad.col(layout_.numeric[j]) = gx.col(static_cast<Eigen::Index>(j));
  return grad;
}

const Matrix& TrainedClassifier::head_weight() const { return params_.at("head.weight"); }

RowVector TrainedClassifier::head_bias() const { return params_.at("head.bias").row(0); }

TrainedClassifier TrainedClassifier::with_head(Matrix weight, RowVector bias) const {
  const Matrix& w = head_weight();
  if (weight.rows() != w.rows() || weight.cols() != w.cols() || bias.size() != w.cols())
    throw InvalidArgument("with_head: shape mismatch");
  ParameterSet p = params_;
  p.values[p.index_of("head.weight")] = std::move(weight);
  p.values[p.index_of("head.bias")] = Matrix(bias);
  TrainedClassifier copy(arch_, layout_, std::move(p), buffers_, standardizer_);
  copy.epoch_losses_ = epoch_losses_;
  return copy;
}

TrainedClassifier init_classifier(const ArchitectureConfig& arch, const InputLayout& layout, Rng& rng) {
  return TrainedClassifier(arch, layout, init_parameters(arch, layout, rng), init_buffers(arch));
}

TrainedClassifier train_classifier(const data::Dataset& ds, ArchitectureConfig arch, const TrainConfig& cfg,
                                   std::optional<data::Standardizer> standardizer) {
  cfg.validate();
  ds.validate();
  if (ds.rows() == 0) throw InvalidArgument("train_classifier: empty dataset");
  if (ds.class_count() < 2) throw InvalidArgument("train_classifier: need at least two classes present");
  if (!all_finite(ds.features)) throw InvalidArgument("train_classifier: non-finite features");
  const int inferred = ds.max_label() + 1;
  if (arch.num_classes == 0) arch.num_classes = inferred;
  if (arch.num_classes < inferred) throw InvalidArgument("train_classifier: labels exceed num_classes");
  arch.validate();

  const InputLayout layout = InputLayout::from_schema(ds.schema);
  Rng init_rng(mix_seed(cfg.seed, 0));
  Rng shuffle_rng(mix_seed(cfg.seed, 1));
  Rng dropout_rng(mix_seed(cfg.seed, 2));
  ParameterSet params = init_parameters(arch, layout, init_rng);
  ParameterSet buffers = init_buffers(arch);
  AdamW opt(cfg.adamw(), params.values);

  const auto n = static_cast<Eigen::Index>(ds.rows());
  const Eigen::Index C = arch.num_classes;
  std::vector<double> losses;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<std::size_t> order = shuffle_rng.permutation(ds.rows());
    double total = 0.0;
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, n - start);
      Matrix batch(len, ds.features.cols());
      Matrix onehot = Matrix::Zero(len, C);
      for (Eigen::Index i = 0; i < len; ++i) {
        const std::size_t r = order[static_cast<std::size_t>(start + i)];
        batch.row(i) = ds.features.row(static_cast<Eigen::Index>(r));
        onehot(i, ds.labels[r]) = 1.0;
      }
      ad::Tape tape;
      std::vector<ad::Var> vars;
      vars.reserve(params.size());
      for (const Matrix& p : params.values) vars.push_back(tape.variable(p));
      GraphContext ctx{tape, vars, params, Mode::train, &dropout_rng, &buffers};
      GraphOutputs g =
          build_graph(arch, layout, ctx, tape.constant(numeric_columns(batch, layout.numeric)), batch);
      ad::Var loss = ad::scale(ad::sum(ad::mul(tape.constant(std::move(onehot)), ad::log_softmax_rows(g.logits))),
                               -1.0 / static_cast<double>(len));
      const double value = loss.value()(0, 0);
      if (!std::isfinite(value)) throw DivergedTraining("train_classifier: non-finite loss", epoch + 1);
      tape.backward(loss);
      std::vector<Matrix> grads;
      grads.reserve(vars.size());
      for (const ad::Var& v : vars) grads.push_back(tape.gradient(v));
      opt.step(params.values, grads);
      total += value * static_cast<double>(len);
    }
    losses.push_back(total / static_cast<double>(n));
  }
  TrainedClassifier model(arch, layout, std::move(params), std::move(buffers), std::move(standardizer));
  model.set_epoch_losses(std::move(losses));
  return model;
}

Matrix predict_proba(const TrainedClassifier& model, const Matrix& batch) {
  return softmax_rows(model.logits(batch));
}

}  // namespace tabood::models
