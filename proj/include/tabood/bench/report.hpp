#pragma once

#include "tabood/eval/metrics.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace tabood::bench {

/// One (model, detector, split, metric) cell. `values` holds one entry per
/// successful repeat on the 0-1 scale. A non-empty `error` marks an error row.
struct ReportRow {
  std::string model;
  std::string detector;
  std::string split;
  std::string metric;
  std::vector<double> values;
  eval::MetricSummary summary;
  std::string error;

  bool ok() const { return error.empty(); }
};

/// Synthesized protocol: metric of one corrupted feature in one repeat.
struct FeatureValue {
  std::string model, detector, split, metric;
  std::size_t repeat = 0;
  std::size_t slot = 0;     // position in the sampled feature list
  std::size_t feature = 0;  // column index
  double value = 0.0;
};

/// Scores kept with --keep-raw. `set` is "id" or "ood" or "ood.<slot>".
struct ScoreDump {
  std::string model, detector, split, set;
  std::size_t repeat = 0;
  std::vector<double> scores;
};

struct ModelDetectors {
  std::string model;
  std::vector<std::string> detectors;
};

struct BenchReport {
  /// Ordered model -> detector layout; rows follow it, then splits, then metrics.
  std::vector<ModelDetectors> layout;
  std::vector<std::string> splits;
  std::vector<std::string> metrics;
  std::vector<ReportRow> rows;
  std::vector<FeatureValue> per_feature;
  std::vector<ScoreDump> scores;
  nlohmann::json provenance;

  const ReportRow* find(const std::string& model, const std::string& detector, const std::string& split,
                        const std::string& metric) const;
};

/// model,detector,split,metric,mean,std,n,status,message. 0-100 scale, one decimal.
std::string emit_csv(const BenchReport& report);
/// One table per (model, metric): detectors as rows, splits as columns.
std::string emit_markdown(const BenchReport& report);
std::string emit(const BenchReport& report, const std::string& format);

/// report.csv, report.md, provenance.json and raw/ under `dir`.
void write_report(const BenchReport& report, const std::filesystem::path& dir);
/// meta.json, metrics.csv, per_feature.csv and (if present) scores/.
void write_raw(const BenchReport& report, const std::filesystem::path& raw_dir);
/// Rebuilds a report (without scores) from a raw directory.
BenchReport read_raw(const std::filesystem::path& raw_dir);

}  // namespace tabood::bench
