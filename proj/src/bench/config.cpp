#include "tabood/bench/config.hpp"

#include "tabood/error.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace tabood::bench {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InvalidArgument("config: " + key + " expects a number, got '" + v + "'");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw InvalidArgument("config: " + key + " expects an integer, got '" + v + "'");
  }
}

std::size_t to_size(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < 0) throw InvalidArgument("config: " + key + " must be non-negative");
  return static_cast<std::size_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string l = lower(v);
  if (l == "true" || l == "yes" || l == "1" || l == "on") return true;
  if (l == "false" || l == "no" || l == "0" || l == "off") return false;
  throw InvalidArgument("config: " + key + " expects a boolean, got '" + v + "'");
}

/// Walks a section and rejects keys nobody consumed.
class Reader {
public:
  explicit Reader(const IniFile::Section& s) : section_(s) {}
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [k, v] : section_.entries)
      if (!used_.count(k)) throw InvalidArgument("config: unknown key '" + k + "' in [" + section_.name + "]");
  }

  template <typename F>
  void on(const std::string& key, F&& f) {
    if (!section_.has(key)) return;
    used_.insert(key);
    f(section_.get(key));
  }
  const std::string& need(const std::string& key) {
    used_.insert(key);
    return section_.get(key);
  }

private:
  const IniFile::Section& section_;
  std::set<std::string> used_;
};

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

std::string factor_label(double f) {
  std::ostringstream ss;
  ss << f;
  return ss.str();
}

void read_arch_overrides(Reader& r, models::ArchitectureConfig& a) {
  r.on("width", [&](const std::string& v) { a.width = static_cast<int>(to_int("width", v)); });
  r.on("depth", [&](const std::string& v) { a.depth = static_cast<int>(to_int("depth", v)); });
  r.on("dropout", [&](const std::string& v) { a.dropout = to_double("dropout", v); });
  r.on("token_dim", [&](const std::string& v) { a.token_dim = static_cast<int>(to_int("token_dim", v)); });
  r.on("heads", [&](const std::string& v) { a.heads = static_cast<int>(to_int("heads", v)); });
  r.on("ffn_factor", [&](const std::string& v) { a.ffn_factor = static_cast<int>(to_int("ffn_factor", v)); });
  r.on("residual_scale", [&](const std::string& v) { a.residual_scale = to_double("residual_scale", v); });
}

DatasetSpec read_dataset(const IniFile::Section& s, const std::string& name, const std::filesystem::path& base) {
  DatasetSpec d;
  d.name = name;
  Reader r(s);
  const std::string type = lower(r.need("type"));
  if (type == "csv") d.kind = DatasetSpec::Kind::csv;
  else if (type == "timeseries") d.kind = DatasetSpec::Kind::timeseries;
  else if (type == "binary") d.kind = DatasetSpec::Kind::binary;
  else if (type == "blobs") d.kind = DatasetSpec::Kind::blobs;
  else if (type == "toy2d") d.kind = DatasetSpec::Kind::toy2d;
  else throw InvalidArgument("config: unknown dataset type '" + type + "'");

  r.on("path", [&](const std::string& v) { d.path = resolve(base, v); });
  r.on("series", [&](const std::string& v) { d.series = resolve(base, v); });
  r.on("label", [&](const std::string& v) { d.table.label_column = v; });
  r.on("id_column", [&](const std::string& v) {
    d.table.id_column = v;
    d.timeseries.id_column = v;
  });
  r.on("split_columns", [&](const std::string& v) { d.table.split_columns = split_list(v); });
  r.on("categorical", [&](const std::string& v) { d.table.categorical_columns = split_list(v); });
  r.on("drop", [&](const std::string& v) { d.table.drop_columns = split_list(v); });
  r.on("variables", [&](const std::string& v) { d.timeseries.variables = split_list(v); });
  r.on("variable_column", [&](const std::string& v) { d.timeseries.variable_column = v; });
  r.on("time_column", [&](const std::string& v) { d.timeseries.time_column = v; });
  r.on("value_column", [&](const std::string& v) { d.timeseries.value_column = v; });
  r.on("max_time", [&](const std::string& v) { d.timeseries.max_time = to_double("max_time", v); });

  r.on("n", [&](const std::string& v) { d.blobs.n = to_size("n", v); });
  r.on("d", [&](const std::string& v) { d.blobs.d = to_size("d", v); });
  r.on("separation", [&](const std::string& v) { d.blobs.class_separation = to_double("separation", v); });
  r.on("positive_fraction", [&](const std::string& v) { d.blobs.positive_fraction = to_double("positive_fraction", v); });
  r.on("offset", [&](const std::string& v) { d.blobs.population_offset = to_double("offset", v); });
  r.on("offset_seed", [&](const std::string& v) { d.blobs.offset_seed = to_size("offset_seed", v); });
  r.on("seed", [&](const std::string& v) { d.blobs.seed = to_size("seed", v); });
  r.on("classes", [&](const std::string& v) { d.toy_classes = to_size("classes", v); });

  const bool file = d.kind == DatasetSpec::Kind::csv || d.kind == DatasetSpec::Kind::binary ||
                    d.kind == DatasetSpec::Kind::timeseries;
  if (file && d.path.empty()) throw InvalidArgument("config: dataset '" + name + "' needs a path");
  if (d.kind == DatasetSpec::Kind::timeseries && d.series.empty())
    throw InvalidArgument("config: dataset '" + name + "' needs a series file");
  return d;
}

void read_splits(const IniFile::Section& s, const std::string& name, BenchConfig& cfg) {
  Reader r(s);
  SplitSpec base;
  base.name = name;
  base.group = name;
  const std::string type = lower(r.need("type"));
  base.dataset = r.need("dataset");
  if (type == "near") {
    base.kind = SplitSpec::Kind::near;
    r.on("predicate", [&](const std::string& v) { base.predicate = v; });
    r.on("preset", [&](const std::string& v) {
      for (const auto& p : data::near_split_presets())
        if (p.name == v) base.predicate = p.predicate;
      if (base.predicate.empty()) throw InvalidArgument("config: unknown near preset '" + v + "'");
    });
    if (base.predicate.empty()) throw InvalidArgument("config: near split '" + name + "' needs a predicate");
    data::Predicate::parse(base.predicate);
    cfg.splits.push_back(base);
  } else if (type == "far") {
    base.kind = SplitSpec::Kind::far;
    base.ood_dataset = r.need("ood");
    cfg.splits.push_back(base);
  } else if (type == "synthesized") {
    base.kind = SplitSpec::Kind::synthesized;
    std::vector<double> factors{10.0, 100.0, 1000.0};
    r.on("factors", [&](const std::string& v) {
      factors.clear();
      for (const auto& f : split_list(v)) factors.push_back(to_double("factors", f));
    });
    r.on("features", [&](const std::string& v) { base.features = to_size("features", v); });
    r.on("stage", [&](const std::string& v) {
      const std::string l = lower(v);
      if (l == "standardized") base.stage = data::CorruptionStage::standardized;
      else if (l == "raw") base.stage = data::CorruptionStage::raw;
      else throw InvalidArgument("config: stage must be standardized or raw");
    });
    if (factors.empty()) throw InvalidArgument("config: synthesized split needs factors");
    for (double f : factors) {
      SplitSpec one = base;
      one.factor = f;
      one.name = name + "_x" + factor_label(f);
      cfg.splits.push_back(one);
    }
  } else {
    throw InvalidArgument("config: unknown split type '" + type + "'");
  }
}

void read_detectors(const IniFile::Section& s, BenchConfig& cfg) {
  Reader r(s);
  auto& p = cfg.posthoc_options;
  auto& d = cfg.density_options;
  for (const std::string& m : split_list(r.need("methods"))) {
    try {
      cfg.posthoc.push_back(posthoc::parse_method(m));
      continue;
    } catch (const InvalidArgument&) {
    }
    cfg.density.push_back(density::parse_method(m));
  }
  r.on("knn_k", [&](const std::string& v) { p.knn_k = static_cast<int>(to_int("knn_k", v)); });
  r.on("knn_normalize", [&](const std::string& v) { p.knn_normalize = to_bool("knn_normalize", v); });
  r.on("react_percentile", [&](const std::string& v) { p.react_percentile = to_double("react_percentile", v); });
  r.on("dice_p", [&](const std::string& v) { p.dice_p = to_double("dice_p", v); });
  r.on("ash_percentile", [&](const std::string& v) { p.ash_percentile = to_double("ash_percentile", v); });
  r.on("ash_variant", [&](const std::string& v) {
    const std::string l = lower(v);
    if (l == "prune") p.ash_variant = posthoc::AshVariant::prune;
    else if (l == "scale") p.ash_variant = posthoc::AshVariant::scale;
    else throw InvalidArgument("config: ash_variant must be prune or scale");
  });
  r.on("odin_temperature", [&](const std::string& v) { p.odin_temperature = to_double("odin_temperature", v); });
  r.on("odin_epsilon", [&](const std::string& v) { p.odin_epsilon = to_double("odin_epsilon", v); });
  r.on("ebo_temperature", [&](const std::string& v) { p.ebo_temperature = to_double("ebo_temperature", v); });
  r.on("openmax_tail", [&](const std::string& v) { p.openmax_tail = static_cast<int>(to_int("openmax_tail", v)); });
  r.on("openmax_alpha", [&](const std::string& v) { p.openmax_alpha = static_cast<int>(to_int("openmax_alpha", v)); });
  r.on("gram_powers", [&](const std::string& v) {
    p.gram_powers.clear();
    for (const auto& x : split_list(v)) p.gram_powers.push_back(static_cast<int>(to_int("gram_powers", x)));
  });
  r.on("vim_dim", [&](const std::string& v) { p.vim_dim = static_cast<int>(to_int("vim_dim", v)); });
  r.on("ae_latent", [&](const std::string& v) { d.autoencoder.latent = static_cast<int>(to_int("ae_latent", v)); });
  r.on("ae_hidden_width", [&](const std::string& v) {
    d.autoencoder.hidden_width = static_cast<int>(to_int("ae_hidden_width", v));
  });
  r.on("ae_hidden_layers", [&](const std::string& v) {
    d.autoencoder.hidden_layers = static_cast<int>(to_int("ae_hidden_layers", v));
  });
  r.on("vae_samples", [&](const std::string& v) {
    d.autoencoder.mc_samples = static_cast<int>(to_int("vae_samples", v));
  });
  r.on("flow_layers", [&](const std::string& v) { d.flow.layers = static_cast<int>(to_int("flow_layers", v)); });
  r.on("flow_hidden_width", [&](const std::string& v) {
    d.flow.hidden_width = static_cast<int>(to_int("flow_hidden_width", v));
  });
  r.on("flow_max_scale", [&](const std::string& v) { d.flow.max_scale = to_double("flow_max_scale", v); });
  r.on("ppca_components", [&](const std::string& v) {
    d.ppca_components = static_cast<int>(to_int("ppca_components", v));
  });
  r.on("lof_k", [&](const std::string& v) { d.lof_k = static_cast<int>(to_int("lof_k", v)); });
}

json arch_json(const models::ArchitectureConfig& a) {
  return {{"kind", models::to_string(a.kind)}, {"width", a.width},         {"depth", a.depth},
          {"dropout", a.dropout},              {"token_dim", a.token_dim}, {"heads", a.heads},
          {"ffn_factor", a.ffn_factor},        {"residual_scale", a.residual_scale}};
}

}  // namespace

bool IniFile::Section::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
}

const std::string& IniFile::Section::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw InvalidArgument("config: [" + name + "] is missing '" + key + "'");
}

std::string IniFile::Section::get(const std::string& key, const std::string& fallback) const {
  return has(key) ? get(key) : fallback;
}

IniFile IniFile::parse(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "config line " + std::to_string(number);
    if (line.front() == '[') {
      if (line.back() != ']') throw InvalidArgument(where + ": unterminated section header");
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw InvalidArgument(where + ": empty section name");
      if (ini.find(name)) throw InvalidArgument(where + ": duplicate section [" + name + "]");
      ini.sections.push_back({name, {}});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument(where + ": expected key = value");
    if (ini.sections.empty()) throw InvalidArgument(where + ": entry outside a section");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InvalidArgument(where + ": empty key");
    auto& sec = ini.sections.back();
    if (sec.has(key)) throw InvalidArgument(where + ": duplicate key '" + key + "'");
    sec.entries.emplace_back(key, trim(line.substr(eq + 1)));
  }
  return ini;
}

const IniFile::Section* IniFile::find(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

const DatasetSpec& BenchConfig::dataset(const std::string& name) const {
  for (const auto& d : datasets)
    if (d.name == name) return d;
  throw InvalidArgument("config: unknown dataset '" + name + "'");
}

void BenchConfig::validate() const {
  if (repeats < 1) throw InvalidArgument("config: repeats must be >= 1");
  if (!(val_fraction >= 0 && test_fraction > 0 && val_fraction + test_fraction < 1))
    throw InvalidArgument("config: bad val/test fractions");
  if (metrics.empty()) throw InvalidArgument("config: no metrics");
  for (const auto& m : metrics)
    if (m != "auroc" && m != "fpr95") throw InvalidArgument("config: unknown metric '" + m + "'");
  if (posthoc.empty() && density.empty()) throw InvalidArgument("config: no detectors");
  if (!posthoc.empty() && architectures.empty()) throw InvalidArgument("config: post-hoc detectors need architectures");
  if (splits.empty()) throw InvalidArgument("config: no splits");
  train.validate();
  for (const auto& [kind, a] : arch_configs) a.validate();
  std::set<std::string> names;
  for (const auto& s : splits) {
    if (!names.insert(s.name).second) throw InvalidArgument("config: duplicate split '" + s.name + "'");
    dataset(s.dataset);
    if (s.kind == SplitSpec::Kind::far) dataset(s.ood_dataset);
    if (s.kind == SplitSpec::Kind::synthesized && (!(s.factor > 0) || s.features < 1))
      throw InvalidArgument("config: synthesized split needs factor > 0 and features >= 1");
  }
}

json BenchConfig::to_json() const {
  json j;
  j["repeats"] = repeats;
  j["seed"] = seed;
  j["val_fraction"] = val_fraction;
  j["test_fraction"] = test_fraction;
  j["metrics"] = metrics;
  json ds = json::array();
  for (const auto& d : datasets) {
    ds.push_back({{"name", d.name},
                  {"kind", static_cast<int>(d.kind)},
                  {"path", d.path.filename().string()},
                  {"series", d.series.filename().string()},
                  {"label", d.table.label_column},
                  {"split_columns", d.table.split_columns},
                  {"categorical", d.table.categorical_columns},
                  {"drop", d.table.drop_columns},
                  {"blobs", {d.blobs.n, d.blobs.d, d.blobs.class_separation, d.blobs.positive_fraction,
                             d.blobs.population_offset, d.blobs.offset_seed, d.blobs.seed}},
                  {"classes", d.toy_classes}});
  }
  j["datasets"] = ds;
  json archs = json::array();
  for (auto k : architectures) archs.push_back(arch_json(arch_configs.at(k)));
  j["architectures"] = archs;
  j["train"] = {train.epochs, train.batch_size, train.lr, train.weight_decay};
  json dets = json::array();
  for (auto m : posthoc) dets.push_back(posthoc::to_string(m));
  for (auto m : density) dets.push_back(density::to_string(m));
  j["detectors"] = dets;
  const auto& p = posthoc_options;
  j["posthoc_options"] = {p.knn_k, p.knn_normalize, p.react_percentile, p.dice_p, p.ash_percentile,
                          static_cast<int>(p.ash_variant), p.odin_temperature, p.odin_epsilon, p.ebo_temperature,
                          p.openmax_tail, p.openmax_alpha, p.gram_powers, p.vim_dim};
  const auto& d = density_options;
  j["density_options"] = {d.autoencoder.latent, d.autoencoder.hidden_width, d.autoencoder.hidden_layers,
                          d.autoencoder.mc_samples, d.flow.layers, d.flow.hidden_width, d.flow.max_scale,
                          d.ppca_components, d.lof_k};
  json sp = json::array();
  for (const auto& s : splits)
    sp.push_back({{"name", s.name}, {"group", s.group}, {"kind", static_cast<int>(s.kind)}, {"dataset", s.dataset},
                  {"ood", s.ood_dataset}, {"predicate", s.predicate}, {"factor", s.factor},
                  {"features", s.features}, {"stage", static_cast<int>(s.stage)}});
  j["splits"] = sp;
  return j;
}

std::uint64_t config_hash(const BenchConfig& cfg) { return fnv1a(cfg.to_json().dump()); }

BenchConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  const IniFile ini = IniFile::parse(text);
  BenchConfig cfg;
  std::vector<const IniFile::Section*> arch_sections;
  const IniFile::Section* shared_section = nullptr;
  for (const auto& s : ini.sections) {
    const std::string& n = s.name;
    if (n == "general") {
      Reader r(s);
      r.on("repeats", [&](const std::string& v) { cfg.repeats = to_size("repeats", v); });
      r.on("seed", [&](const std::string& v) { cfg.seed = to_size("seed", v); });
      r.on("output", [&](const std::string& v) { cfg.output = resolve(base_dir, v); });
      r.on("val_fraction", [&](const std::string& v) { cfg.val_fraction = to_double("val_fraction", v); });
      r.on("test_fraction", [&](const std::string& v) { cfg.test_fraction = to_double("test_fraction", v); });
      r.on("metrics", [&](const std::string& v) {
        cfg.metrics.clear();
        for (const auto& m : split_list(v)) cfg.metrics.push_back(lower(m));
      });
    } else if (n.rfind("data.", 0) == 0) {
      cfg.datasets.push_back(read_dataset(s, n.substr(5), base_dir));
    } else if (n == "models") {
      Reader r(s);
      r.on("architectures", [&](const std::string& v) {
        for (const auto& a : split_list(v)) cfg.architectures.push_back(models::parse_arch(a));
      });
      r.on("epochs", [&](const std::string& v) { cfg.train.epochs = static_cast<int>(to_int("epochs", v)); });
      r.on("batch_size", [&](const std::string& v) {
        cfg.train.batch_size = static_cast<int>(to_int("batch_size", v));
      });
      r.on("lr", [&](const std::string& v) { cfg.train.lr = to_double("lr", v); });
      r.on("weight_decay", [&](const std::string& v) { cfg.train.weight_decay = to_double("weight_decay", v); });
      models::ArchitectureConfig probe;
      read_arch_overrides(r, probe);
      shared_section = &s;
    } else if (n.rfind("models.", 0) == 0) {
      arch_sections.push_back(&s);
    } else if (n == "detectors") {
      read_detectors(s, cfg);
    } else if (n.rfind("split.", 0) == 0) {
      read_splits(s, n.substr(6), cfg);
    } else {
      throw InvalidArgument("config: unknown section [" + n + "]");
    }
  }
  // [models] overrides apply to every architecture, [models.<arch>] to one
  for (auto kind : cfg.architectures) {
    models::ArchitectureConfig a = models::ArchitectureConfig::defaults(kind);
    if (shared_section) {
      IniFile::Section only_overrides{shared_section->name, {}};
      for (const auto& e : shared_section->entries)
        if (e.first != "architectures" && e.first != "epochs" && e.first != "batch_size" && e.first != "lr" &&
            e.first != "weight_decay")
          only_overrides.entries.push_back(e);
      Reader r(only_overrides);
      read_arch_overrides(r, a);
    }
    cfg.arch_configs[kind] = a;
  }
  for (const auto* s : arch_sections) {
    const auto kind = models::parse_arch(s->name.substr(7));
    if (!cfg.arch_configs.count(kind)) throw InvalidArgument("config: [" + s->name + "] is not a listed architecture");
    Reader r(*s);
    read_arch_overrides(r, cfg.arch_configs[kind]);
  }
  cfg.density_options.train = cfg.train;
  cfg.validate();
  return cfg;
}

BenchConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

}  // namespace tabood::bench
