#include "tabood/models/entropy_map.hpp"

#include "tabood/error.hpp"
#include "tabood/numerics/ops.hpp"

#include <algorithm>
#include <cmath>

namespace tabood::models {

EntropyMap entropy_map(const TrainedClassifier& model, const GridSpec& grid) {
  if (model.input_dim() != 2) throw InvalidArgument("entropy_map: model must take exactly 2 features");
  if (grid.resolution < 2) throw InvalidArgument("entropy_map: resolution must be >= 2");
  for (double v : {grid.x_min, grid.x_max, grid.y_min, grid.y_max})
    if (!std::isfinite(v)) throw InvalidArgument("entropy_map: grid bounds must be finite");
  if (!(grid.x_max > grid.x_min) || !(grid.y_max > grid.y_min))
    throw InvalidArgument("entropy_map: empty grid range");

  const int r = grid.resolution;
  Matrix points(static_cast<Eigen::Index>(r) * r, 2);
  for (int i = 0; i < r; ++i) {
    const double x = grid.x_min + (grid.x_max - grid.x_min) * i / (r - 1);
    for (int j = 0; j < r; ++j) {
      const double y = grid.y_min + (grid.y_max - grid.y_min) * j / (r - 1);
      points(static_cast<Eigen::Index>(i) * r + j, 0) = x;
      points(static_cast<Eigen::Index>(i) * r + j, 1) = y;
    }
  }
  const Matrix inputs = model.standardizer() ? model.standardizer()->transform(points) : points;
  const Matrix probs = softmax_rows(model.logits(inputs));

  EntropyMap out;
  out.num_classes = model.num_classes();
  out.max_entropy = std::log(static_cast<double>(out.num_classes));
  out.cells.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index k = 0; k < points.rows(); ++k) {
    const double h = std::clamp(entropy(probs.row(k)), 0.0, out.max_entropy);
    out.cells.push_back({points(k, 0), points(k, 1), h});
  }
  return out;
}

}  // namespace tabood::models
