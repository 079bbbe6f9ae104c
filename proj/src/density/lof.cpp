#include "tabood/density/lof.hpp"

#include "tabood/error.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace tabood::density {

namespace {

struct Neighbors {
  IndexVector index;
  std::vector<double> distance;
};

// sequential accumulation keeps results independent of vector width
double distance(const Matrix& points, Eigen::Index i, const RowVector& query) {
  double s = 0.0;
  for (Eigen::Index c = 0; c < points.cols(); ++c) {
    const double diff = points(i, c) - query(c);
    s += diff * diff;
  }
  return std::sqrt(s);
}

Neighbors nearest(const Matrix& points, int k, const RowVector& query, Eigen::Index skip) {
  std::vector<std::pair<double, Eigen::Index>> all;
  all.reserve(static_cast<std::size_t>(points.rows()));
  for (Eigen::Index i = 0; i < points.rows(); ++i)
    if (i != skip) all.emplace_back(distance(points, i, query), i);
  const auto kk = static_cast<std::ptrdiff_t>(k);
  std::partial_sort(all.begin(), all.begin() + kk, all.end());
  Neighbors out;
  for (std::ptrdiff_t j = 0; j < kk; ++j) {
    out.distance.push_back(all[static_cast<std::size_t>(j)].first);
    out.index.push_back(all[static_cast<std::size_t>(j)].second);
  }
  return out;
}

double reach_density(const NeighborIndex& index, const Neighbors& nb) {
  double total = 0.0;
  for (std::size_t j = 0; j < nb.index.size(); ++j)
    total += std::max(index.k_distance(nb.index[j]), nb.distance[j]);
  const double mean_reach = std::max(total / static_cast<double>(nb.index.size()), kDensityFloor);
  return std::max(1.0 / mean_reach, kDensityFloor);
}

}  // namespace

IndexVector NeighborIndex::neighbors(const RowVector& query, Eigen::Index skip) const {
  return nearest(points, k, query, skip).index;
}

NeighborIndex build_neighbor_index(const Matrix& points, int k) {
  if (k < 1 || k >= points.rows()) throw InvalidArgument("lof: need 1 <= k < number of points");
  if (!points.allFinite()) throw InvalidArgument("lof: non-finite points");
  NeighborIndex index;
  index.points = points;
  index.k = k;
  const Eigen::Index n = points.rows();
  std::vector<Neighbors> nbs(static_cast<std::size_t>(n));
  index.k_distance.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    nbs[static_cast<std::size_t>(i)] = nearest(points, k, points.row(i), i);
    index.k_distance(i) = nbs[static_cast<std::size_t>(i)].distance.back();
  }
  index.lrd.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) index.lrd(i) = reach_density(index, nbs[static_cast<std::size_t>(i)]);
  return index;
}

Vector lof_novelty(const NeighborIndex& index, const Matrix& x) {
  if (x.cols() != index.points.cols()) throw InvalidArgument("lof_novelty: dimension mismatch");
  Vector out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Neighbors nb = nearest(index.points, index.k, x.row(r), -1);
    double mean_lrd = 0.0;
    for (Eigen::Index j : nb.index) mean_lrd += index.lrd(j);
    mean_lrd /= static_cast<double>(nb.index.size());
    out(r) = mean_lrd / reach_density(index, nb);
  }
  return out;
}

}  // namespace tabood::density
