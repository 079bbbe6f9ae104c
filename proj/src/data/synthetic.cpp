#include "tabood/data/synthetic.hpp"

#include "tabood/error.hpp"
#include "tabood/numerics/rng.hpp"

#include <cmath>
#include <numbers>

namespace tabood::data {

namespace {

Vector random_unit(Rng& rng, std::size_t d) {
  Vector u(static_cast<Eigen::Index>(d));
  do {
    for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = rng.normal();
  } while (u.norm() < 1e-12);
  return u / u.norm();
}

Schema numeric_schema(std::size_t d) {
  std::vector<FeatureDesc> features;
  for (std::size_t j = 0; j < d; ++j) {
    FeatureDesc f;
    f.name = "x" + std::to_string(j);
    features.push_back(std::move(f));
  }
  return Schema(std::move(features));
}

}  // namespace

Dataset make_blobs(const BlobOptions& o) {
  if (o.d == 0) throw InvalidArgument("make_blobs: d must be at least 1");
  if (o.n < 2) throw InvalidArgument("make_blobs: n must be at least 2");
  if (o.positive_fraction < 0 || o.positive_fraction > 1)
    throw InvalidArgument("make_blobs: positive_fraction outside [0, 1]");
  Rng rng(o.seed);
  const Vector direction = random_unit(rng, o.d);
  Rng offset_rng(mix_seed(o.offset_seed, 0xB10B));
  const Vector offset = o.population_offset * random_unit(offset_rng, o.d);

  const auto positives = static_cast<std::size_t>(std::llround(o.positive_fraction * static_cast<double>(o.n)));
  std::vector<int> labels(o.n, 0);
  const auto order = rng.permutation(o.n);
  for (std::size_t i = 0; i < positives; ++i) labels[order[i]] = 1;

  Dataset ds;
  ds.schema = numeric_schema(o.d);
  ds.features.resize(static_cast<Eigen::Index>(o.n), static_cast<Eigen::Index>(o.d));
  for (std::size_t i = 0; i < o.n; ++i) {
    const double sign = labels[i] == 1 ? 0.5 : -0.5;
    for (std::size_t j = 0; j < o.d; ++j) {
      const auto jj = static_cast<Eigen::Index>(j);
      ds.features(static_cast<Eigen::Index>(i), jj) =
          rng.normal() + sign * o.class_separation * direction(jj) + offset(jj);
    }
  }
  ds.labels = std::move(labels);
  return ds;
}

Dataset make_blobs(std::size_t n, std::size_t d, double class_separation, std::uint64_t seed) {
  BlobOptions o;
  o.n = n;
  o.d = d;
  o.class_separation = class_separation;
  o.seed = seed;
  return make_blobs(o);
}

Dataset make_toy2d(std::size_t n, std::size_t classes, std::uint64_t seed) {
  if (classes < 2) throw InvalidArgument("make_toy2d: need at least two classes");
  if (n < classes) throw InvalidArgument("make_toy2d: n must be at least the class count");
  Rng rng(seed);
  constexpr double kRadius = 3.0;
  constexpr double kSpread = 0.5;
  Dataset ds;
  ds.schema = numeric_schema(2);
  ds.features.resize(static_cast<Eigen::Index>(n), 2);
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = i % classes;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(c) / static_cast<double>(classes);
    const auto ii = static_cast<Eigen::Index>(i);
    ds.features(ii, 0) = kRadius * std::cos(angle) + kSpread * rng.normal();
    ds.features(ii, 1) = kRadius * std::sin(angle) + kSpread * rng.normal();
    ds.labels[i] = static_cast<int>(c);
  }
  return ds;
}

}  // namespace tabood::data
