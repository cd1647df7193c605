#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biomauth/data.hpp"
#include "biomauth/metrics.hpp"
#include "biomauth/splitting.hpp"

// Reference implementations and self-test suites. The oracles here share no
// code with the library routines they check.
namespace biomauth::selfcheck {

/// Counts by direct enumeration of the four (decision, truth) cases.
ConfusionCounts oracle_confusion(std::span<const ScoredPrediction> preds);

/// Ratios straight from the definitions; eer is left at 0.
MetricReport oracle_metrics(std::span<const ScoredPrediction> preds);

/// FAR and FRR at `threshold` by counting (accept when score >= threshold).
struct Rates {
  double far;
  double frr;
};
Rates oracle_rates(std::span<const ScoreLabel> scores, double threshold);

/// Exhaustive sweep: evaluates the rates at -inf, at every score, and at
/// +inf by counting, then interpolates at the first sign change of FAR-FRR.
double oracle_eer(std::span<const ScoreLabel> scores);

/// Random prediction set of `size` entries with both classes present when
/// size >= 2. Scores are quantised so ties occur.
std::vector<ScoredPrediction> random_predictions(std::size_t size, std::uint64_t seed);

/// Returns one message per violated split invariant; empty when the split
/// is sound. `genuine_train`/`genuine_test` are the expected counts.
std::vector<std::string> split_violations(const Dataset& dataset, const UserSplit& split,
                                          std::size_t genuine_train, std::size_t genuine_test);

struct SuiteResult {
  std::string name;
  bool passed = true;
  std::size_t checks = 0;
  std::vector<std::string> failures;  // first few only
  double worst = 0.0;                 // largest observed error, where meaningful
  double seconds = 0.0;
};

/// `sets` random prediction sets of sizes 2..500 against the oracles.
SuiteResult metric_oracle_suite(std::size_t sets = 1000, std::uint64_t seed = 1);

/// `instances` random gradient checks for each of LR, MLP, and LSTM.
SuiteResult gradient_check_suite(std::size_t instances = 10, std::uint64_t seed = 1,
                                 double tolerance = 1e-4);

/// Every user of a synthetic `users` x 100 dataset, across `seeds` split seeds.
SuiteResult split_invariant_suite(std::size_t seeds = 20, std::size_t users = 51, std::uint64_t seed = 1);

std::vector<SuiteResult> run_all();

}  // namespace biomauth::selfcheck
