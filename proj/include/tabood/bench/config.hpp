#pragma once

#include "tabood/data/io.hpp"
#include "tabood/data/splits.hpp"
#include "tabood/data/synthetic.hpp"
#include "tabood/density/detectors.hpp"
#include "tabood/models/config.hpp"
#include "tabood/posthoc/detectors.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace tabood::bench {

inline constexpr const char* kVersion = "0.1.0";

/// Named sections of `key = value` lines. `#` and `;` start comments.
/// Section and key order is preserved.
struct IniFile {
  struct Section {
    std::string name;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const;
    /// Throws InvalidArgument if absent.
    const std::string& get(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback) const;
  };
  std::vector<Section> sections;

  static IniFile parse(const std::string& text);
  const Section* find(const std::string& name) const;
};

struct DatasetSpec {
  enum class Kind { csv, timeseries, binary, blobs, toy2d };
  std::string name;
  Kind kind = Kind::csv;
  std::filesystem::path path;    // csv / binary / statics table
  std::filesystem::path series;  // timeseries long-format file
  data::TableOptions table;
  data::TimeSeriesOptions timeseries;
  data::BlobOptions blobs;
  std::size_t toy_classes = 3;
};

struct SplitSpec {
  enum class Kind { near, far, synthesized };
  std::string name;
  /// Section the split came from; factor splits of one section share it.
  std::string group;
  Kind kind = Kind::near;
  std::string dataset;      // ID source
  std::string ood_dataset;  // far
  std::string predicate;    // near
  double factor = 10.0;     // synthesized
  std::size_t features = 100;
  data::CorruptionStage stage = data::CorruptionStage::standardized;
};

struct BenchConfig {
  std::size_t repeats = 5;
  std::uint64_t seed = 0;
  std::filesystem::path output = "bench_out";
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  std::vector<std::string> metrics{"auroc", "fpr95"};

  std::vector<DatasetSpec> datasets;
  std::vector<models::ArchKind> architectures;
  models::TrainConfig train;
  std::map<models::ArchKind, models::ArchitectureConfig> arch_configs;

  std::vector<posthoc::Method> posthoc;
  std::vector<density::Method> density;
  posthoc::PosthocOptions posthoc_options;
  density::DensityOptions density_options;

  /// Synthesized specs are already expanded to one split per factor.
  std::vector<SplitSpec> splits;

  void validate() const;
  const DatasetSpec& dataset(const std::string& name) const;
  std::uint64_t repeat_seed(std::size_t r) const { return seed + r; }
  /// Canonical description used for the provenance hash.
  nlohmann::json to_json() const;
};

BenchConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
BenchConfig load_config(const std::filesystem::path& path);

std::uint64_t config_hash(const BenchConfig& cfg);

}  // namespace tabood::bench
