#pragma once

#include "tabood/data/dataset.hpp"

#include <cstdint>

namespace tabood::data {

struct BlobOptions {
  std::size_t n = 1000;
  std::size_t d = 10;
  /// Distance between the two class means in units of the noise std.
  double class_separation = 3.0;
  /// Fraction of rows with label 1.
  double positive_fraction = 0.5;
  /// Added to every row; moves the whole population.
  double population_offset = 0.0;
  /// Direction of the population offset is drawn from `offset_seed`.
  std::uint64_t offset_seed = 0;
  std::uint64_t seed = 0;
};

/// Two Gaussian classes (unit isotropic noise) whose means differ by
/// `class_separation` along a seed-determined unit direction.
Dataset make_blobs(const BlobOptions& options);
Dataset make_blobs(std::size_t n, std::size_t d, double class_separation, std::uint64_t seed);

/// Multi-class 2D toy task: `classes` Gaussian clusters (std 0.5) evenly
/// spaced on a circle of radius 3. Throws InvalidArgument if n < classes.
Dataset make_toy2d(std::size_t n, std::size_t classes, std::uint64_t seed);

}  // namespace tabood::data
