#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tabood::data {

enum class FeatureKind { numeric, categorical };
enum class Provenance { time_dependent, time_independent };

/// One column of the model feature matrix. Categorical columns hold integer
/// codes indexing `categories`.
struct FeatureDesc {
  std::string name;
  FeatureKind kind = FeatureKind::numeric;
  std::vector<std::string> categories;
  Provenance provenance = Provenance::time_independent;
  // Set for time-dependent aggregates only.
  std::string variable;
  std::string window;
  std::string statistic;

  bool is_numeric() const { return kind == FeatureKind::numeric; }
};

class Schema {
public:
  Schema() = default;
  /// Throws InvalidArgument on duplicate names.
  explicit Schema(std::vector<FeatureDesc> features);

  std::size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  const FeatureDesc& operator[](std::size_t i) const { return features_[i]; }
  const std::vector<FeatureDesc>& features() const { return features_; }

  std::optional<std::size_t> index_of(const std::string& name) const;
  std::vector<std::string> names() const;
  std::vector<std::size_t> numeric_indices() const;
  std::vector<std::size_t> categorical_indices() const;

  bool operator==(const Schema&) const;

private:
  std::vector<FeatureDesc> features_;
};

bool operator==(const FeatureDesc& a, const FeatureDesc& b);

/// Name of the aggregate feature for (variable, window, statistic).
std::string aggregate_feature_name(const std::string& variable, const std::string& window,
                                   const std::string& statistic);

}  // namespace tabood::data
