#include "tabood/eval/metrics.hpp"

#include "tabood/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace tabood::eval {

void ScorePair::validate() const {
  if (id_scores.empty() || ood_scores.empty()) throw InvalidArgument("score pair: empty side");
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(id_scores.begin(), id_scores.end(), finite) ||
      !std::all_of(ood_scores.begin(), ood_scores.end(), finite))
    throw InvalidArgument("score pair: non-finite score");
}

double auroc(const ScorePair& pair) {
  pair.validate();
  const std::size_t n = pair.id_scores.size();
  const std::size_t m = pair.ood_scores.size();
  std::vector<std::pair<double, bool>> all;
  all.reserve(n + m);
  for (double s : pair.id_scores) all.emplace_back(s, false);
  for (double s : pair.ood_scores) all.emplace_back(s, true);
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  // Sum of (1-based) average ranks of the OOD samples.
  double ood_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    std::size_t ood_in_group = 0;
    while (j < all.size() && all[j].first == all[i].first) {
      ood_in_group += all[j].second ? 1 : 0;
      ++j;
    }
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    ood_rank_sum += avg_rank * static_cast<double>(ood_in_group);
    i = j;
  }
  const double md = static_cast<double>(m);
  const double u = ood_rank_sum - md * (md + 1.0) / 2.0;
  return u / (static_cast<double>(n) * md);
}

double fpr_at_tpr(const ScorePair& pair, double tpr_target, PositiveClass positive) {
  pair.validate();
  if (!(tpr_target > 0.0 && tpr_target < 1.0)) throw InvalidArgument("fpr_at_tpr: target outside (0, 1)");
  if (positive == PositiveClass::ood) {
    std::vector<double> ood = pair.ood_scores;
    std::sort(ood.begin(), ood.end(), std::greater<>());
    const auto k = static_cast<std::size_t>(std::ceil(tpr_target * static_cast<double>(ood.size()) - 1e-9));
    const double threshold = ood[std::clamp<std::size_t>(k, 1, ood.size()) - 1];
    const auto fp = std::count_if(pair.id_scores.begin(), pair.id_scores.end(),
                                  [threshold](double s) { return s >= threshold; });
    return static_cast<double>(fp) / static_cast<double>(pair.id_scores.size());
  }
  std::vector<double> id = pair.id_scores;
  std::sort(id.begin(), id.end());
  const auto k = static_cast<std::size_t>(std::ceil(tpr_target * static_cast<double>(id.size()) - 1e-9));
  const double threshold = id[std::clamp<std::size_t>(k, 1, id.size()) - 1];
  const auto fp = std::count_if(pair.ood_scores.begin(), pair.ood_scores.end(),
                                [threshold](double s) { return s <= threshold; });
  return static_cast<double>(fp) / static_cast<double>(pair.ood_scores.size());
}

MetricSummary summarize(std::span<const double> repeats, std::string metric) {
  if (repeats.empty()) throw InvalidArgument("summarize: no repeats");
  const double n = static_cast<double>(repeats.size());
  const double mean = std::accumulate(repeats.begin(), repeats.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : repeats) ss += (v - mean) * (v - mean);
  return MetricSummary{std::move(metric), mean, std::sqrt(ss / n), repeats.size()};
}

std::string format_percent(const MetricSummary& s) {
  char buf[64];
  // Adding 0.0 folds a negative zero into "0.0".
  std::snprintf(buf, sizeof(buf), "%.1f±%.1f", 100.0 * s.mean + 0.0, 100.0 * s.stddev + 0.0);
  return buf;
}

}  // namespace tabood::eval
