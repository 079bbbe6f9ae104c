#include "tabood/data/schema.hpp"

#include "tabood/error.hpp"

#include <unordered_set>

namespace tabood::data {

Schema::Schema(std::vector<FeatureDesc> features) : features_(std::move(features)) {
  std::unordered_set<std::string> seen;
  for (const FeatureDesc& f : features_) {
    if (!seen.insert(f.name).second) throw InvalidArgument("schema: duplicate feature name '" + f.name + "'");
    if (f.kind == FeatureKind::categorical && f.categories.empty())
      throw InvalidArgument("schema: categorical feature '" + f.name + "' has no categories");
  }
}

std::optional<std::size_t> Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].name == name) return i;
  return std::nullopt;
}

std::vector<std::string> Schema::names() const {
  std::vector<std::string> out;
  out.reserve(features_.size());
  for (const FeatureDesc& f : features_) out.push_back(f.name);
  return out;
}

std::vector<std::size_t> Schema::numeric_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (features_[i].is_numeric()) out.push_back(i);
  return out;
}

std::vector<std::size_t> Schema::categorical_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < features_.size(); ++i)
    if (!features_[i].is_numeric()) out.push_back(i);
  return out;
}

bool operator==(const FeatureDesc& a, const FeatureDesc& b) {
  return a.name == b.name && a.kind == b.kind && a.categories == b.categories &&
         a.provenance == b.provenance && a.variable == b.variable && a.window == b.window &&
         a.statistic == b.statistic;
}

bool Schema::operator==(const Schema& other) const { return features_ == other.features_; }

std::string aggregate_feature_name(const std::string& variable, const std::string& window,
                                   const std::string& statistic) {
  return variable + "__" + window + "__" + statistic;
}

}  // namespace tabood::data
