#include "tabood/bench/runner.hpp"

#include "tabood/data/io.hpp"
#include "tabood/data/standardizer.hpp"
#include "tabood/data/synthetic.hpp"
#include "tabood/error.hpp"

#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>
#include <tuple>

namespace tabood::bench {

namespace {

const char* kDensityModel = "density";

using CellKey = std::tuple<std::string, std::string, std::string, std::string>;

struct CellValue {
  double value = 0.0;
  std::string error;
};

struct TaskResult {
  std::size_t repeat = 0;
  std::map<CellKey, CellValue> cells;
  std::vector<FeatureValue> per_feature;
  std::vector<ScoreDump> scores;
};

/// One OOD scoring set; synthesized sets are materialized on demand.
struct OodSet {
  std::size_t split = 0;  // index into the group's splits
  std::string set;        // "ood" or "ood.<slot>"
  std::size_t slot = 0;
  std::size_t feature = 0;
  bool synthesized = false;
};

struct Prepared {
  data::Dataset train, val, test, test_raw;
  data::Standardizer standardizer;
  data::Dataset ood;  // near / far
  std::vector<OodSet> sets;
};

struct Task {
  std::size_t repeat = 0;
  std::size_t group = 0;
  std::optional<models::ArchKind> arch;  // empty = density
};

struct Group {
  std::string name;
  std::vector<SplitSpec> splits;
};

std::string hex(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Prepared prepare(const BenchConfig& cfg, const Group& g, const std::map<std::string, data::Dataset>& datasets,
                 std::uint64_t repeat_seed) {
  const SplitSpec& first = g.splits.front();
  data::Dataset id;
  Prepared p;
  if (first.kind == SplitSpec::Kind::near) {
    auto parts = data::near_ood_split(datasets.at(first.dataset), data::Predicate::parse(first.predicate));
    id = std::move(parts.first);
    p.ood = std::move(parts.second);
  } else if (first.kind == SplitSpec::Kind::far) {
    auto parts = data::far_ood_align(datasets.at(first.dataset), datasets.at(first.ood_dataset));
    id = std::move(parts.first);
    p.ood = std::move(parts.second);
  } else {
    id = datasets.at(first.dataset);
  }
  Rng split_rng(mix_seed(repeat_seed, fnv1a("split:" + g.name)));
  const data::RowSplit rows = data::split_rows(id.rows(), cfg.val_fraction, cfg.test_fraction, split_rng);
  const data::Dataset train_raw = id.select_rows(rows.train);
  p.standardizer = data::Standardizer::fit(train_raw);
  p.train = p.standardizer.transform(train_raw);
  p.val = p.standardizer.transform(id.select_rows(rows.val));
  p.test_raw = id.select_rows(rows.test);
  p.test = p.standardizer.transform(p.test_raw);
  if (first.kind != SplitSpec::Kind::synthesized) {
    p.ood = p.standardizer.transform(p.ood);
    p.sets.push_back({0, "ood", 0, 0, false});
    return p;
  }
  Rng feature_rng(mix_seed(repeat_seed, fnv1a("features:" + g.name)));
  const auto features = data::sample_corruption_features(p.test, first.features, feature_rng);
  for (std::size_t s = 0; s < g.splits.size(); ++s)
    for (std::size_t slot = 0; slot < features.size(); ++slot)
      p.sets.push_back({s, "ood." + std::to_string(slot), slot, features[slot], true});
  return p;
}

data::Dataset materialize(const Prepared& p, const Group& g, const OodSet& set) {
  if (!set.synthesized) return p.ood;
  const SplitSpec& spec = g.splits[set.split];
  if (spec.stage == data::CorruptionStage::standardized) return data::synthesize_ood(p.test, set.feature, spec.factor);
  return p.standardizer.transform(data::synthesize_ood(p.test_raw, set.feature, spec.factor));
}

double metric_value(const std::string& metric, const Vector& id, const Vector& ood) {
  eval::ScorePair pair;
  pair.id_scores.assign(id.data(), id.data() + id.size());
  pair.ood_scores.assign(ood.data(), ood.data() + ood.size());
  if (metric == "auroc") return eval::auroc(pair);
  return eval::fpr_at_tpr(pair, 0.95);
}

/// Scores of the currently fitted detectors on one dataset.
using Scorer = std::function<Vector(std::size_t detector, const data::Dataset& ds)>;

/// Shared scoring loop over the OOD sets of a group.
void evaluate(const BenchConfig& cfg, const Group& g, const Prepared& p, const std::string& model,
              const std::vector<std::string>& detectors, std::vector<std::string> fit_errors,
              const std::function<void(const data::Dataset&)>& before_set, const Scorer& score,
              bool keep_raw, TaskResult& out) {
  const std::size_t nd = detectors.size();
  // per detector, per split, per metric: slot values
  std::vector<std::vector<std::vector<std::vector<double>>>> values(
      nd, std::vector<std::vector<std::vector<double>>>(g.splits.size(),
                                                        std::vector<std::vector<double>>(cfg.metrics.size())));
  std::vector<std::vector<std::string>> errors(nd, std::vector<std::string>(g.splits.size()));
  std::vector<Vector> id_scores(nd);
  try {
    before_set(p.test);
  } catch (const std::exception& e) {
    for (auto& err : fit_errors)
      if (err.empty()) err = std::string("scoring failed: ") + e.what();
  }
  for (std::size_t d = 0; d < nd; ++d) {
    if (!fit_errors[d].empty()) continue;
    try {
      id_scores[d] = score(d, p.test);
      if (keep_raw)
        for (const auto& s : g.splits)
          out.scores.push_back({model, detectors[d], s.name, "id", out.repeat,
                                std::vector<double>(id_scores[d].data(), id_scores[d].data() + id_scores[d].size())});
    } catch (const std::exception& e) {
      fit_errors[d] = std::string("scoring failed: ") + e.what();
    }
  }
  for (const OodSet& set : p.sets) {
    data::Dataset ood;
    std::string set_error;
    try {
      ood = materialize(p, g, set);
      before_set(ood);
    } catch (const std::exception& e) {
      set_error = std::string("ood set failed: ") + e.what();
    }
    for (std::size_t d = 0; d < nd; ++d) {
      if (!fit_errors[d].empty() || !errors[d][set.split].empty()) continue;
      if (!set_error.empty()) {
        errors[d][set.split] = set_error;
        continue;
      }
      try {
        const Vector s = score(d, ood);
        for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
          const double v = metric_value(cfg.metrics[m], id_scores[d], s);
          values[d][set.split][m].push_back(v);
          if (set.synthesized)
            out.per_feature.push_back({model, detectors[d], g.splits[set.split].name, cfg.metrics[m], out.repeat,
                                       set.slot, set.feature, v});
        }
        if (keep_raw)
          out.scores.push_back({model, detectors[d], g.splits[set.split].name, set.set, out.repeat,
                                std::vector<double>(s.data(), s.data() + s.size())});
      } catch (const std::exception& e) {
        errors[d][set.split] = std::string("scoring failed: ") + e.what();
      }
    }
  }
  for (std::size_t d = 0; d < nd; ++d)
    for (std::size_t s = 0; s < g.splits.size(); ++s)
      for (std::size_t m = 0; m < cfg.metrics.size(); ++m) {
        CellValue c;
        if (!fit_errors[d].empty()) {
          c.error = fit_errors[d];
        } else if (!errors[d][s].empty()) {
          c.error = errors[d][s];
        } else {
          const auto& v = values[d][s][m];
          double total = 0.0;
          for (double x : v) total += x;
          c.value = total / static_cast<double>(v.size());
        }
        out.cells[{model, detectors[d], g.splits[s].name, cfg.metrics[m]}] = c;
      }
}

void run_classifier_task(const BenchConfig& cfg, const Group& g, const Prepared& p, models::ArchKind kind,
                         std::uint64_t repeat_seed, bool keep_raw, TaskResult& out) {
  const std::string model = models::to_string(kind);
  std::vector<std::string> names;
  for (auto m : cfg.posthoc) names.push_back(posthoc::to_string(m));
  std::vector<std::string> fit_errors(names.size());
  std::vector<std::unique_ptr<posthoc::PosthocDetector>> detectors(names.size());

  std::shared_ptr<const models::TrainedClassifier> clf;
  try {
    models::TrainConfig tc = cfg.train;
    tc.seed = mix_seed(repeat_seed, fnv1a("model:" + g.name + ":" + model));
    clf = std::make_shared<const models::TrainedClassifier>(
        models::train_classifier(p.train, cfg.arch_configs.at(kind), tc, p.standardizer));
  } catch (const std::exception& e) {
    for (auto& err : fit_errors) err = std::string("training failed: ") + e.what();
  }
  if (clf) {
    std::optional<posthoc::FitData> fit;
    try {
      fit = posthoc::prepare_fit_data(*clf, p.train, p.val);
    } catch (const std::exception& e) {
      for (auto& err : fit_errors) err = std::string("fit data failed: ") + e.what();
    }
    if (fit)
      for (std::size_t d = 0; d < names.size(); ++d) {
        try {
          detectors[d] = posthoc::fit_posthoc(cfg.posthoc[d], clf, *fit, cfg.posthoc_options);
        } catch (const std::exception& e) {
          fit_errors[d] = std::string("fit failed: ") + e.what();
        }
      }
  }
  models::ForwardResult forward;
  evaluate(
      cfg, g, p, model, names, fit_errors,
      [&](const data::Dataset& ds) {
        if (clf) forward = clf->forward_with_features(ds.features);
      },
      [&](std::size_t d, const data::Dataset& ds) { return detectors[d]->score_forward(ds.features, forward); },
      keep_raw, out);
}

void run_density_task(const BenchConfig& cfg, const Group& g, const Prepared& p, std::uint64_t repeat_seed,
                      bool keep_raw, TaskResult& out) {
  std::vector<std::string> names;
  for (auto m : cfg.density) names.push_back(density::to_string(m));
  std::vector<std::string> fit_errors(names.size());
  std::vector<std::unique_ptr<Detector>> detectors(names.size());
  try {
    const Matrix x = density_inputs(p.train);
    for (std::size_t d = 0; d < names.size(); ++d) {
      try {
        density::DensityOptions opt = cfg.density_options;
        opt.train.seed = mix_seed(repeat_seed, fnv1a("density:" + g.name + ":" + names[d]));
        opt.autoencoder.score_seed = mix_seed(opt.train.seed, 7);
        detectors[d] = density::fit_density(cfg.density[d], x, opt);
      } catch (const std::exception& e) {
        fit_errors[d] = std::string("fit failed: ") + e.what();
      }
    }
  } catch (const std::exception& e) {
    for (auto& err : fit_errors) err = std::string("encoding failed: ") + e.what();
  }
  Matrix inputs;
  evaluate(
      cfg, g, p, kDensityModel, names, fit_errors, [&](const data::Dataset& ds) { inputs = density_inputs(ds); },
      [&](std::size_t d, const data::Dataset&) { return detectors[d]->score(inputs); }, keep_raw, out);
}

/// Every cell of a task marked with the same error (split preparation failed).
void fail_task(const BenchConfig& cfg, const Group& g, const Task& t, const std::string& error, TaskResult& out) {
  std::vector<std::string> names;
  std::string model = kDensityModel;
  if (t.arch) {
    model = models::to_string(*t.arch);
    for (auto m : cfg.posthoc) names.push_back(posthoc::to_string(m));
  } else {
    for (auto m : cfg.density) names.push_back(density::to_string(m));
  }
  for (const auto& n : names)
    for (const auto& s : g.splits)
      for (const auto& m : cfg.metrics) out.cells[{model, n, s.name, m}] = CellValue{0.0, error};
}

}  // namespace

std::size_t threads_from_env() {
  const char* v = std::getenv("TABOOD_THREADS");
  if (!v || !*v) return 1;
  char* end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) throw InvalidArgument(std::string("TABOOD_THREADS must be a positive integer, got ") + v);
  return static_cast<std::size_t>(n);
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& job) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

Matrix density_inputs(const data::Dataset& ds) {
  Eigen::Index width = 0;
  for (const auto& f : ds.schema.features())
    width += f.is_numeric() ? 1 : static_cast<Eigen::Index>(f.categories.size());
  Matrix out = Matrix::Zero(ds.features.rows(), width);
  Eigen::Index col = 0;
  for (std::size_t j = 0; j < ds.schema.size(); ++j)
    if (ds.schema[j].is_numeric()) out.col(col++) = ds.features.col(static_cast<Eigen::Index>(j));
  for (std::size_t j = 0; j < ds.schema.size(); ++j) {
    const auto& f = ds.schema[j];
    if (f.is_numeric()) continue;
    const auto card = static_cast<Eigen::Index>(f.categories.size());
    for (Eigen::Index i = 0; i < ds.features.rows(); ++i) {
      const double code = ds.features(i, static_cast<Eigen::Index>(j));
      const auto c = static_cast<Eigen::Index>(code);
      if (code < 0 || c >= card) throw InvalidArgument("density_inputs: category code out of range");
      out(i, col + c) = 1.0;
    }
    col += card;
  }
  return out;
}

std::map<std::string, data::Dataset> load_datasets(const BenchConfig& cfg) {
  std::map<std::string, data::Dataset> out;
  for (const auto& d : cfg.datasets) {
    switch (d.kind) {
      case DatasetSpec::Kind::csv: out[d.name] = data::load_csv_dataset(d.path, d.table); break;
      case DatasetSpec::Kind::timeseries:
        out[d.name] = data::load_timeseries_dataset(data::read_csv(d.series), data::read_csv(d.path), d.table,
                                                    d.timeseries);
        break;
      case DatasetSpec::Kind::binary: out[d.name] = data::read_dataset(d.path); break;
      case DatasetSpec::Kind::blobs: out[d.name] = data::make_blobs(d.blobs); break;
      case DatasetSpec::Kind::toy2d: out[d.name] = data::make_toy2d(d.blobs.n, d.toy_classes, d.blobs.seed); break;
    }
  }
  return out;
}

BenchReport run_benchmark(const BenchConfig& cfg_in, const RunOptions& options) {
  BenchConfig cfg = cfg_in;
  if (options.seed) cfg.seed = *options.seed;
  return run_benchmark(cfg, load_datasets(cfg), RunOptions{options.threads, options.keep_raw, {}, options.log});
}

BenchReport run_benchmark(const BenchConfig& cfg_in, const std::map<std::string, data::Dataset>& datasets,
                          const RunOptions& options) {
  BenchConfig cfg = cfg_in;
  if (options.seed) cfg.seed = *options.seed;
  cfg.validate();
  for (const auto& s : cfg.splits) {
    if (!datasets.count(s.dataset)) throw InvalidArgument("run_benchmark: dataset '" + s.dataset + "' not loaded");
    if (s.kind == SplitSpec::Kind::far && !datasets.count(s.ood_dataset))
      throw InvalidArgument("run_benchmark: dataset '" + s.ood_dataset + "' not loaded");
  }

  std::vector<Group> groups;
  for (const auto& s : cfg.splits) {
    if (groups.empty() || groups.back().name != s.group) groups.push_back({s.group, {}});
    groups.back().splits.push_back(s);
  }
  std::vector<Task> tasks;
  for (std::size_t r = 0; r < cfg.repeats; ++r)
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (!cfg.posthoc.empty())
        for (auto kind : cfg.architectures) tasks.push_back({r, g, kind});
      if (!cfg.density.empty()) tasks.push_back({r, g, std::nullopt});
    }

  std::mutex log_mutex;
  std::vector<TaskResult> results(tasks.size());
  const std::size_t threads = options.threads > 0 ? options.threads : threads_from_env();
  parallel_for(tasks.size(), threads, [&](std::size_t i) {
    const Task& t = tasks[i];
    const Group& g = groups[t.group];
    const std::uint64_t seed = cfg.repeat_seed(t.repeat);
    TaskResult& out = results[i];
    out.repeat = t.repeat;
    if (options.log) {
      std::lock_guard<std::mutex> lock(log_mutex);
      options.log("repeat " + std::to_string(t.repeat + 1) + "/" + std::to_string(cfg.repeats) + " split " + g.name +
                  " model " + (t.arch ? models::to_string(*t.arch) : std::string(kDensityModel)));
    }
    Prepared p;
    try {
      p = prepare(cfg, g, datasets, seed);
    } catch (const std::exception& e) {
      fail_task(cfg, g, t, std::string("split failed: ") + e.what(), out);
      return;
    }
    if (t.arch)
      run_classifier_task(cfg, g, p, *t.arch, seed, options.keep_raw, out);
    else
      run_density_task(cfg, g, p, seed, options.keep_raw, out);
  });

  BenchReport report;
  for (const auto& s : cfg.splits) report.splits.push_back(s.name);
  report.metrics = cfg.metrics;
  if (!cfg.posthoc.empty())
    for (auto kind : cfg.architectures) {
      ModelDetectors md{models::to_string(kind), {}};
      for (auto m : cfg.posthoc) md.detectors.push_back(posthoc::to_string(m));
      report.layout.push_back(md);
    }
  if (!cfg.density.empty()) {
    ModelDetectors md{kDensityModel, {}};
    for (auto m : cfg.density) md.detectors.push_back(density::to_string(m));
    report.layout.push_back(md);
  }
  for (const auto& md : report.layout)
    for (const auto& det : md.detectors)
      for (const auto& split : report.splits)
        for (const auto& metric : report.metrics) {
          ReportRow row{md.model, det, split, metric, {}, {}, {}};
          for (const auto& res : results) {
            auto it = res.cells.find({md.model, det, split, metric});
            if (it == res.cells.end()) continue;
            if (it->second.error.empty())
              row.values.push_back(it->second.value);
            else if (row.error.empty())
              row.error = "repeat " + std::to_string(res.repeat) + ": " + it->second.error;
          }
          if (row.ok() && row.values.size() != cfg.repeats) row.error = "missing repeats";
          if (row.ok()) row.summary = eval::summarize(row.values, metric);
          report.rows.push_back(std::move(row));
        }
  for (auto& res : results) {
    report.per_feature.insert(report.per_feature.end(), res.per_feature.begin(), res.per_feature.end());
    for (auto& s : res.scores) report.scores.push_back(std::move(s));
  }

  std::vector<std::string> seeds;
  for (std::size_t r = 0; r < cfg.repeats; ++r) seeds.push_back(std::to_string(cfg.repeat_seed(r)));
  report.provenance = {{"library", "tabood"},
                       {"version", kVersion},
                       {"config_hash", hex(config_hash(cfg))},
                       {"base_seed", cfg.seed},
                       {"repeats", cfg.repeats},
                       {"repeat_seeds", seeds},
                       {"fpr", "FPR at 95% TPR with OOD as the positive class"},
                       {"standardization",
                        "every detector sees features standardized with ID-train statistics; categorical "
                        "columns are one-hot encoded for density detectors"}};
  return report;
}

}  // namespace tabood::bench
