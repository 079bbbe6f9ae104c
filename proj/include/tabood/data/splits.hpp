#pragma once

#include "tabood/data/dataset.hpp"
#include "tabood/numerics/rng.hpp"

#include <string>
#include <utility>
#include <vector>

namespace tabood::data {

/// Row predicate over a retained split column, e.g. `age > 70`,
/// `gender == Female`, `ethnicity in Caucasian|African American`.
struct Predicate {
  enum class Op { gt, ge, lt, le, eq, ne, in };
  std::string column;
  Op op = Op::eq;
  std::vector<std::string> values;

  /// Throws InvalidArgument on malformed text.
  static Predicate parse(const std::string& text);
  bool matches(const std::string& value) const;
  std::string to_string() const;
};

struct NearSplitPreset {
  std::string name;
  std::string dataset;
  std::string predicate;
};

/// Near-OOD splits used for the eICU and MIMIC-IV experiments.
const std::vector<NearSplitPreset>& near_split_presets();

/// ID = rows satisfying the predicate, OOD = the rest. The predicate variable
/// is removed from the model features of both sides.
std::pair<Dataset, Dataset> near_ood_split(const Dataset& ds, const Predicate& predicate);

/// Projects both datasets onto their shared features (ordered as in `a`),
/// matched by canonical variable name; categorical category sets are unioned
/// and codes remapped.
std::pair<Dataset, Dataset> far_ood_align(const Dataset& a, const Dataset& b);

enum class CorruptionStage { standardized, raw };

/// Copy of `id_test` with one numeric feature multiplied by `factor`.
Dataset synthesize_ood(const Dataset& id_test, std::size_t feature_index, double factor);

/// Features for the synthesized protocol: `count` distinct numeric features
/// without replacement when enough exist, otherwise full passes over the shuffled
/// numeric features truncated to `count`.
std::vector<std::size_t> sample_corruption_features(const Dataset& ds, std::size_t count, Rng& rng);

struct RowSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

/// Shuffled train/val/test partition of 0..n-1.
RowSplit split_rows(std::size_t n, double val_fraction, double test_fraction, Rng& rng);

}  // namespace tabood::data
