#include <doctest.h>

#include "support/oracles.hpp"
#include "tabood/error.hpp"
#include "tabood/eval/metrics.hpp"
#include "tabood/numerics/rng.hpp"

#include <cmath>

using namespace tabood;
using namespace tabood::eval;

namespace {

ScorePair random_pair(Rng& rng, std::size_t n, std::size_t m, bool ties) {
  ScorePair p;
  auto draw = [&](double shift) {
    return ties ? std::floor(rng.uniform(0, 8)) + shift : rng.normal() + shift;
  };
  for (std::size_t i = 0; i < n; ++i) p.id_scores.push_back(draw(0.0));
  for (std::size_t i = 0; i < m; ++i) p.ood_scores.push_back(draw(ties ? 0.0 : 0.5));
  return p;
}

}  // namespace

TEST_CASE("auroc examples") {
  CHECK(auroc({{1, 2, 3}, {10, 11}}) == 1.0);
  CHECK(auroc({{1, 2, 2, 5}, {2, 5, 1, 2}}) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(auroc({{0.1, 0.2, 0.3}, {0.25, 0.4}}) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
  CHECK_THROWS_AS(auroc({{}, {1.0}}), InvalidArgument);
  CHECK_THROWS_AS(auroc({{1.0}, {}}), InvalidArgument);
}

TEST_CASE("auroc matches brute force and is antisymmetric") {
  Rng rng(10);
  for (int trial = 0; trial < 300; ++trial) {
    const ScorePair p = random_pair(rng, 1 + rng.uniform_index(60), 1 + rng.uniform_index(60), trial % 2 == 0);
    CHECK(std::abs(auroc(p) - testing::brute_force_auroc(p.id_scores, p.ood_scores)) <= 1e-12);
    const ScorePair swapped{p.ood_scores, p.id_scores};
    CHECK(std::abs(auroc(p) + auroc(swapped) - 1.0) <= 1e-12);
  }
}

TEST_CASE("metrics are invariant under increasing transforms") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const ScorePair p = random_pair(rng, 80, 70, trial % 2 == 0);
    ScorePair q = p;
    for (double& s : q.id_scores) s = std::exp(s / 4.0);
    for (double& s : q.ood_scores) s = std::exp(s / 4.0);
    CHECK(auroc(p) == auroc(q));
    CHECK(fpr_at_tpr(p) == fpr_at_tpr(q));
    CHECK(fpr_at_tpr(p, 0.95, PositiveClass::id) == fpr_at_tpr(q, 0.95, PositiveClass::id));
  }
}

TEST_CASE("fpr_at_tpr examples") {
  ScorePair p;
  p.id_scores.assign(50, 0.0);
  for (int i = 1; i <= 100; ++i) p.ood_scores.push_back(i);
  CHECK(fpr_at_tpr(p, 0.95) == 0.0);
  // λ = 6: 95 of 100 OOD scores are >= 6; shifting ID to 6 makes all of them positives.
  ScorePair at_threshold = p;
  at_threshold.id_scores.assign(50, 6.0);
  CHECK(fpr_at_tpr(at_threshold, 0.95) == 1.0);
  ScorePair below = p;
  below.id_scores.assign(50, 5.999);
  CHECK(fpr_at_tpr(below, 0.95) == 0.0);

  CHECK(fpr_at_tpr({{1, 2, 3}, {4, 5}}) == 0.0);
  CHECK_THROWS_AS(fpr_at_tpr({{1}, {2}}, 1.0), InvalidArgument);
  CHECK_THROWS_AS(fpr_at_tpr({{}, {2}}), InvalidArgument);
}

TEST_CASE("fpr_at_tpr is monotone in the target") {
  Rng rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const ScorePair p = random_pair(rng, 100, 100, trial % 3 == 0);
    double prev = 0.0;
    for (double t = 0.05; t < 1.0; t += 0.05) {
      const double f = fpr_at_tpr(p, t);
      // A higher TPR needs a lower threshold, which can only admit more ID samples.
      CHECK(f >= prev);
      prev = f;
    }
  }
}

TEST_CASE("random scores give FPR near the target") {
  Rng rng(13);
  ScorePair p;
  for (int i = 0; i < 100000; ++i) p.id_scores.push_back(rng.normal());
  for (int i = 0; i < 100000; ++i) p.ood_scores.push_back(rng.normal());
  CHECK(std::abs(fpr_at_tpr(p) - 0.95) <= 0.01);
  CHECK(std::abs(fpr_at_tpr(p, 0.95, PositiveClass::id) - 0.95) <= 0.01);
}

TEST_CASE("summarize") {
  const std::vector<double> ones = {1, 1, 1};
  const auto a = summarize(ones);
  CHECK(a.mean == 1.0);
  CHECK(a.stddev == 0.0);
  const std::vector<double> two = {0, 2};
  const auto b = summarize(two);
  CHECK(b.mean == 1.0);
  CHECK(b.stddev == 1.0);
  const std::vector<double> one = {0.3};
  CHECK(summarize(one).stddev == 0.0);
  CHECK(summarize(one).count == 1);
  CHECK_THROWS_AS(summarize(std::vector<double>{}), InvalidArgument);

  CHECK(format_percent({"auroc", 0.5, 0.004, 5}) == "50.0±0.4");
  CHECK(format_percent({"auroc", 0.965, 0.002, 5}) == "96.5±0.2");
  CHECK(format_percent({"auroc", 1.0, 0.0, 1}) == "100.0±0.0");
}
