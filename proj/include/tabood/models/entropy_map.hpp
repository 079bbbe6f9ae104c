#pragma once

#include "tabood/models/classifier.hpp"

namespace tabood::models {

/// Square lattice over [x_min, x_max] x [y_min, y_max] with `resolution`
/// points per axis (endpoints included).
struct GridSpec {
  double x_min = -1, x_max = 1;
  double y_min = -1, y_max = 1;
  int resolution = 2;
};

struct EntropyCell {
  double x, y, entropy;
};

struct EntropyMap {
  std::vector<EntropyCell> cells;  // x-major
  int num_classes = 0;
  double max_entropy = 0.0;  // ln C
};

/// Softmax entropy of a 2-feature classifier over a grid. Grid coordinates are
/// raw inputs; the model's recorded standardizer is applied when present.
EntropyMap entropy_map(const TrainedClassifier& model, const GridSpec& grid);

}  // namespace tabood::models
