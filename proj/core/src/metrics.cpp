#include "biomauth/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "biomauth/errors.hpp"

namespace biomauth {

ConfusionCounts compute_confusion(std::span<const ScoredPrediction> preds) {
  if (preds.empty()) throw MetricError("no predictions to tally");
  ConfusionCounts c;
  for (const auto& p : preds) {
    if (p.decision && p.truth) ++c.tp;
    else if (p.decision && !p.truth) ++c.fp;
    else if (!p.decision && !p.truth) ++c.tn;
    else ++c.fn;
  }
  return c;
}

MetricReport compute_metrics(const ConfusionCounts& c) {
  if (c.total() == 0) throw MetricError("metrics need at least one prediction");
  MetricReport r;
  r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  if (c.tp + c.fp == 0) {
    r.precision_undefined = true;
  } else {
    r.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  }
  if (c.tp + c.fn == 0) {
    r.recall_undefined = true;
  } else {
    r.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  }
  const double sum = r.precision + r.recall;
  r.f1 = sum > 0.0 ? 2.0 * r.precision * r.recall / sum : 0.0;
  return r;
}

std::vector<RocPoint> roc_curve(std::span<const ScoreLabel> scores) {
  std::vector<ScoreLabel> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end(), [](const ScoreLabel& a, const ScoreLabel& b) { return a.score < b.score; });
  std::size_t genuine = 0;
  for (const auto& s : sorted) genuine += s.genuine ? 1 : 0;
  const std::size_t impostor = sorted.size() - genuine;
  if (genuine == 0 || impostor == 0) {
    throw MetricError("EER is undefined without both genuine and impostor scores");
  }
  const auto ng = static_cast<double>(genuine);
  const auto ni = static_cast<double>(impostor);

  std::vector<RocPoint> curve;
  curve.reserve(sorted.size() + 2);
  curve.push_back({-std::numeric_limits<double>::infinity(), 1.0, 0.0});
  // Below index i everything is rejected.
  std::size_t rejected_genuine = 0;
  std::size_t rejected_impostor = 0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    const double threshold = sorted[i].score;
    curve.push_back({threshold, static_cast<double>(impostor - rejected_impostor) / ni,
                     static_cast<double>(rejected_genuine) / ng});
    for (; i < sorted.size() && sorted[i].score == threshold; ++i) {
      if (sorted[i].genuine) ++rejected_genuine;
      else ++rejected_impostor;
    }
  }
  curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return curve;
}

EerResult compute_eer(std::span<const ScoreLabel> scores) {
  const auto curve = roc_curve(scores);
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const double gap = curve[k].far - curve[k].frr;
    if (gap == 0.0) return {curve[k].far, curve[k].threshold};
    if (gap < 0.0) {
      // curve[0] has gap 1, so k >= 1 here.
      const auto& a = curve[k - 1];
      const auto& b = curve[k];
      const double gap_a = a.far - a.frr;
      const double alpha = gap_a / (gap_a - gap);
      const double eer = a.far + alpha * (b.far - a.far);
      double threshold;
      if (std::isinf(a.threshold)) threshold = b.threshold;
      else if (std::isinf(b.threshold)) threshold = a.threshold;
      else threshold = a.threshold + alpha * (b.threshold - a.threshold);
      return {std::clamp(eer, 0.0, 1.0), threshold};
    }
  }
  return {curve.back().far, curve.back().threshold};  // unreachable: the last point has gap -1
}

MetricReport evaluate_predictions(std::span<const ScoredPrediction> preds) {
  auto report = compute_metrics(compute_confusion(preds));
  std::vector<ScoreLabel> scores;
  scores.reserve(preds.size());
  for (const auto& p : preds) scores.push_back({p.genuine_score, p.truth});
  report.eer = compute_eer(scores).eer;
  return report;
}

}  // namespace biomauth
