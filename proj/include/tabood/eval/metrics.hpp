#pragma once

#include <span>
#include <string>
#include <vector>

namespace tabood::eval {

/// Novelty scores of ID and OOD test samples (higher = more OOD).
struct ScorePair {
  std::vector<double> id_scores;
  std::vector<double> ood_scores;

  /// Throws InvalidArgument if a side is empty or holds non-finite scores.
  void validate() const;
};

/// P(ood > id) + 0.5 P(ood == id), via average ranks in O(N log N).
double auroc(const ScorePair& pair);

enum class PositiveClass {
  /// OOD is positive: threshold at the OOD score quantile, FPR over ID.
  ood,
  /// ID is positive (low scores): threshold at the ID quantile, FPR over OOD.
  id,
};

/// False-positive rate at the threshold where the true-positive rate first
/// reaches `tpr_target`.
double fpr_at_tpr(const ScorePair& pair, double tpr_target = 0.95,
                  PositiveClass positive = PositiveClass::ood);

struct MetricSummary {
  std::string metric;
  double mean = 0.0;
  /// Population standard deviation.
  double stddev = 0.0;
  std::size_t count = 0;
};

MetricSummary summarize(std::span<const double> repeats, std::string metric = {});

/// "mean±std" on the 0-100 scale with one decimal, e.g. "96.5±0.2".
std::string format_percent(const MetricSummary& s);

}  // namespace tabood::eval
