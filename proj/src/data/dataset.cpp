#include "tabood/data/dataset.hpp"

#include "tabood/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace tabood::data {

void Dataset::validate() const {
  if (static_cast<std::size_t>(features.cols()) != schema.size())
    throw InvalidArgument("dataset: feature matrix has " + std::to_string(features.cols()) +
                          " columns but schema has " + std::to_string(schema.size()));
  if (labels.size() != rows()) throw InvalidArgument("dataset: label count differs from row count");
  for (const SplitColumn& c : split_columns)
    if (c.values.size() != rows())
      throw InvalidArgument("dataset: split column '" + c.name + "' has wrong length");
  for (int y : labels)
    if (y < 0) throw InvalidArgument("dataset: negative label");
  if (!features.allFinite()) throw InvalidArgument("dataset: non-finite feature values");
  for (std::size_t j : schema.categorical_indices()) {
    const auto k = static_cast<double>(schema[j].categories.size());
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      const double code = features(i, static_cast<Eigen::Index>(j));
      if (code < 0 || code >= k || code != std::floor(code))
        throw InvalidArgument("dataset: invalid category code in '" + schema[j].name + "'");
    }
  }
}

const SplitColumn* Dataset::split_column(const std::string& name) const {
  for (const SplitColumn& c : split_columns)
    if (c.name == name) return &c;
  return nullptr;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& idx) const {
  Dataset out;
  out.schema = schema;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.labels.reserve(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= rows()) throw InvalidArgument("dataset: row index out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
    out.labels.push_back(labels[idx[i]]);
  }
  for (const SplitColumn& c : split_columns) {
    SplitColumn s{c.name, {}};
    s.values.reserve(idx.size());
    for (std::size_t i : idx) s.values.push_back(c.values[i]);
    out.split_columns.push_back(std::move(s));
  }
  return out;
}

Dataset Dataset::drop_features(const std::vector<std::string>& names) const {
  const std::set<std::string> drop(names.begin(), names.end());
  std::vector<FeatureDesc> kept;
  std::vector<Eigen::Index> cols;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (drop.count(schema[j].name)) continue;
    kept.push_back(schema[j]);
    cols.push_back(static_cast<Eigen::Index>(j));
  }
  Dataset out;
  out.schema = Schema(std::move(kept));
  out.features = features(Eigen::all, cols);
  out.labels = labels;
  out.split_columns = split_columns;
  return out;
}

std::size_t Dataset::class_count() const {
  return std::set<int>(labels.begin(), labels.end()).size();
}

int Dataset::max_label() const {
  return labels.empty() ? -1 : *std::max_element(labels.begin(), labels.end());
}

Dataset drop_incomplete_rows(const Dataset& ds) {
  std::vector<std::size_t> keep;
  for (Eigen::Index i = 0; i < ds.features.rows(); ++i)
    if (ds.features.row(i).allFinite()) keep.push_back(static_cast<std::size_t>(i));
  return ds.select_rows(keep);
}

Dataset concat_rows(const Dataset& a, const Dataset& b) {
  if (!(a.schema == b.schema)) throw InvalidArgument("concat_rows: schemas differ");
  Dataset out;
  out.schema = a.schema;
  out.features.resize(a.features.rows() + b.features.rows(), a.features.cols());
  out.features << a.features, b.features;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  for (const SplitColumn& c : a.split_columns) {
    const SplitColumn* other = b.split_column(c.name);
    if (other == nullptr) continue;
    SplitColumn s = c;
    s.values.insert(s.values.end(), other->values.begin(), other->values.end());
    out.split_columns.push_back(std::move(s));
  }
  return out;
}

}  // namespace tabood::data
