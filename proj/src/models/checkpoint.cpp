#include "tabood/models/checkpoint.hpp"

#include "tabood/error.hpp"

#include <fstream>

namespace tabood::models {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<Eigen::Index>(data.size()) != rows * cols)
    throw InvalidArgument("checkpoint: matrix size does not match its shape");
  Matrix m(rows, cols);
  std::copy(data.begin(), data.end(), m.data());
  return m;
}

namespace {

json params_to_json(const ParameterSet& p) {
  json arr = json::array();
  for (std::size_t i = 0; i < p.size(); ++i) arr.push_back({{"name", p.names[i]}, {"value", matrix_to_json(p.values[i])}});
  return arr;
}

ParameterSet params_from_json(const json& arr) {
  ParameterSet p;
  for (const json& e : arr) p.add(e.at("name").get<std::string>(), matrix_from_json(e.at("value")));
  return p;
}

json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
  const auto d = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(d.data(), static_cast<Eigen::Index>(d.size()));
}

}  // namespace

json to_json(const TrainedClassifier& model) {
  const ArchitectureConfig& a = model.arch();
  const InputLayout& l = model.layout();
  json j;
  j["version"] = kCheckpointVersion;
  j["architecture"] = {{"kind", to_string(a.kind)},  {"width", a.width},
                       {"depth", a.depth},           {"dropout", a.dropout},
                       {"token_dim", a.token_dim},   {"heads", a.heads},
                       {"ffn_factor", a.ffn_factor}, {"residual_scale", a.residual_scale},
                       {"num_classes", a.num_classes}};
  j["layout"] = {{"input_dim", l.input_dim},
                 {"numeric", l.numeric},
                 {"categorical", l.categorical},
                 {"cardinalities", l.cardinalities}};
  if (const auto& s = model.standardizer()) {
    j["standardizer"] = {{"numeric_mask", s->numeric_mask()},
                         {"mean", vector_to_json(s->mean())},
                         {"stddev", vector_to_json(s->stddev())}};
  } else {
    j["standardizer"] = nullptr;
  }
  j["parameters"] = params_to_json(model.parameters());
  j["buffers"] = params_to_json(model.buffers());
  j["epoch_losses"] = model.epoch_losses();
  return j;
}

TrainedClassifier classifier_from_json(const json& j) {
  try {
    if (!j.contains("version")) throw InvalidArgument("checkpoint: missing version");
    const int version = j.at("version").get<int>();
    if (version != kCheckpointVersion)
      throw InvalidArgument("checkpoint: unsupported version " + std::to_string(version));
    const json& ja = j.at("architecture");
    ArchitectureConfig a;
    a.kind = parse_arch(ja.at("kind").get<std::string>());
    a.width = ja.at("width").get<int>();
    a.depth = ja.at("depth").get<int>();
    a.dropout = ja.at("dropout").get<double>();
    a.token_dim = ja.at("token_dim").get<int>();
    a.heads = ja.at("heads").get<int>();
    a.ffn_factor = ja.at("ffn_factor").get<int>();
    a.residual_scale = ja.at("residual_scale").get<double>();
    a.num_classes = ja.at("num_classes").get<int>();
    const json& jl = j.at("layout");
    InputLayout l;
    l.input_dim = jl.at("input_dim").get<std::size_t>();
    l.numeric = jl.at("numeric").get<IndexVector>();
    l.categorical = jl.at("categorical").get<IndexVector>();
    l.cardinalities = jl.at("cardinalities").get<std::vector<int>>();
    std::optional<data::Standardizer> standardizer;
    if (j.contains("standardizer") && !j.at("standardizer").is_null()) {
      const json& js = j.at("standardizer");
      standardizer = data::Standardizer(js.at("numeric_mask").get<std::vector<bool>>(),
                                        vector_from_json(js.at("mean")), vector_from_json(js.at("stddev")));
    }
    TrainedClassifier model(a, l, params_from_json(j.at("parameters")), params_from_json(j.at("buffers")),
                            std::move(standardizer));
    if (j.contains("epoch_losses")) model.set_epoch_losses(j.at("epoch_losses").get<std::vector<double>>());
    return model;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const TrainedClassifier& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << to_json(model).dump() << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TrainedClassifier load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("'" + path.string() + "' is not a valid checkpoint: " + e.what());
  }
  return classifier_from_json(j);
}

}  // namespace tabood::models
