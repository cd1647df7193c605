#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "biomauth/classifiers.hpp"

namespace biomauth {

/// Positive class is genuine.
struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

/// All values are fractions in [0,1]. Precision or recall with a zero
/// denominator is reported as 0 and flagged.
struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double eer = 0.0;
  bool precision_undefined = false;
  bool recall_undefined = false;
};

struct RocPoint {
  double threshold;
  double far;  // FP / (FP + TN)
  double frr;  // FN / (FN + TP)
};

struct EerResult {
  double eer;
  double threshold;
};

/// Throws MetricError on empty input.
ConfusionCounts compute_confusion(std::span<const ScoredPrediction> preds);

/// Leaves eer at 0; see compute_eer. Throws MetricError when total() is 0.
MetricReport compute_metrics(const ConfusionCounts& counts);

struct ScoreLabel {
  double score;
  bool genuine;
};

/// Operating points for thresholds -inf, every distinct score ascending,
/// and +inf, accepting when score >= threshold.
std::vector<RocPoint> roc_curve(std::span<const ScoreLabel> scores);

/// Rate where FAR equals FRR along roc_curve(), interpolating linearly
/// between the adjacent points that bracket the crossing. Throws
/// MetricError unless both classes are present.
EerResult compute_eer(std::span<const ScoreLabel> scores);

/// Confusion counts, the four ratios, and the score-based EER together.
MetricReport evaluate_predictions(std::span<const ScoredPrediction> preds);

}  // namespace biomauth
