// Acceptance suite: one PASS/FAIL line per criterion. Exit status is
// nonzero when any unconditional criterion fails.
#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "biomauth/errors.hpp"
#include "biomauth/experiment.hpp"
#include "biomauth/selfcheck.hpp"

using namespace biomauth;
namespace sc = biomauth::selfcheck;

namespace {

constexpr double kMetricOracleSeconds = 10.0;
constexpr double kSplitSuiteSeconds = 5.0;
constexpr double kGradientSeconds = 30.0;
constexpr double kGradientTolerance = 1e-4;
constexpr double kRandomEerLow = 0.45;
constexpr double kRandomEerHigh = 0.55;
constexpr double kSeparatedAccuracy = 0.90;
constexpr double kChanceLow = 0.35;
constexpr double kChanceHigh = 0.80;
constexpr std::size_t kRfRankLimit = 3;
constexpr double kGridSeconds = 600.0;
constexpr double kRealRfLow = 0.80;
constexpr double kRealRfHigh = 0.92;
constexpr std::uint64_t kSeed = 42;

struct Outcome {
  bool passed;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string suite_detail(const sc::SuiteResult& r) {
  std::string s = fmt::format("{} checks, worst error {:.3g}, {:.2f} s", r.checks, r.worst, r.seconds);
  for (const auto& f : r.failures) s += "; " + f;
  return s;
}

Outcome metric_oracle() {
  const auto r = sc::metric_oracle_suite(1000, kSeed);
  const bool fast = r.seconds < kMetricOracleSeconds;
  return {r.passed && fast, suite_detail(r)};
}

Outcome eer_boundaries() {
  std::vector<ScoreLabel> separated = {{0.9, true}, {0.8, true}, {0.7, true}, {0.3, false}, {0.1, false}};
  std::vector<ScoreLabel> inverted;
  for (const auto& s : separated) inverted.push_back({s.score, !s.genuine});
  const double e0 = compute_eer(separated).eer;
  const double e1 = compute_eer(inverted).eer;

  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<ScoreLabel> random;
  for (int i = 0; i < 10000; ++i) random.push_back({u(rng), coin(rng)});
  const double er = compute_eer(random).eer;
  return {e0 == 0.0 && e1 == 1.0 && er >= kRandomEerLow && er <= kRandomEerHigh,
          fmt::format("separated {}, inverted {}, random {:.4f}", e0, e1, er)};
}

Outcome split_invariants() {
  const auto r = sc::split_invariant_suite(20, 51, kSeed);
  return {r.passed && r.seconds < kSplitSuiteSeconds, suite_detail(r)};
}

Outcome mask_enumeration() {
  std::vector<std::string> problems;
  const auto masks = enumerate_masks();
  if (masks.size() != 15) problems.push_back(fmt::format("{} masks", masks.size()));
  const std::map<FeatureGroup, std::size_t> dims = {
      {FeatureGroup::kTouch, 15}, {FeatureGroup::kAcc, 3}, {FeatureGroup::kGyro, 3}, {FeatureGroup::kMag, 3}};
  for (const auto& [group, dim] : dims) {
    if (FeatureMask{group}.dimension() != dim) problems.push_back(fmt::format("{} dimension", group_name(group)));
  }
  for (auto mask : masks) {
    std::size_t expected = 0;
    for (const auto& [group, dim] : dims) expected += mask.contains(group) ? dim : 0;
    if (mask.dimension() != expected || mask.columns().size() != expected) {
      problems.push_back(fmt::format("{} not additive", mask.name()));
    }
  }
  const auto d = generate_synthetic({.n_users = 3, .samples_per_user = 5, .separation = 1.0, .seed = kSeed});
  for (const auto& s : d.samples()) {
    const auto p = project(s, FeatureMask::full());
    if (!std::equal(p.begin(), p.end(), s.features.begin(), s.features.end())) {
      problems.push_back("full mask is not the identity");
      break;
    }
  }
  std::string detail = fmt::format("{} masks", masks.size());
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Outcome gradient_checks() {
  const auto r = sc::gradient_check_suite(10, kSeed, kGradientTolerance);
  return {r.passed && r.worst < kGradientTolerance && r.seconds < kGradientSeconds, suite_detail(r)};
}

std::map<ClassifierKind, double> mean_accuracy_full_mask(double separation) {
  const auto d = generate_synthetic({.n_users = 51, .samples_per_user = 100, .separation = separation, .seed = kSeed});
  ExperimentConfig c;
  c.masks = {FeatureMask::full()};
  c.global_seed = kSeed;
  const auto grid = run_grid(d, c);
  std::map<ClassifierKind, double> out;
  for (auto kind : kAllKinds) {
    out[kind] = grid.aggregate.find(FeatureMask::full(), kind, Population::kAll)->mean.accuracy;
  }
  return out;
}

std::string accuracy_list(const std::map<ClassifierKind, double>& acc) {
  std::string s;
  for (const auto& [kind, a] : acc) s += fmt::format("{}{} {:.3f}", s.empty() ? "" : ", ", kind_name(kind), a);
  return s;
}

Outcome classifier_sanity() {
  std::vector<std::string> problems;
  const auto high = mean_accuracy_full_mask(10.0);
  for (const auto& [kind, a] : high) {
    if (a < kSeparatedAccuracy) problems.push_back(fmt::format("sep10 {} {:.3f} < {}", kind_name(kind), a, kSeparatedAccuracy));
  }
  const auto none = mean_accuracy_full_mask(0.0);
  for (const auto& [kind, a] : none) {
    if (a < kChanceLow || a > kChanceHigh) {
      problems.push_back(fmt::format("sep0 {} {:.3f} outside [{}, {}]", kind_name(kind), a, kChanceLow, kChanceHigh));
    }
  }
  const auto mid = mean_accuracy_full_mask(2.0);
  std::size_t rank = 1;
  for (const auto& [kind, a] : mid) rank += (kind != ClassifierKind::kRF && a > mid.at(ClassifierKind::kRF)) ? 1 : 0;
  if (rank > kRfRankLimit) problems.push_back(fmt::format("sep2 RF ranks {}", rank));

  std::string detail = fmt::format("sep10 [{}]; sep0 [{}]; sep2 [{}]", accuracy_list(high), accuracy_list(none),
                                   accuracy_list(mid));
  for (const auto& p : problems) detail += "; " + p;
  return {problems.empty(), detail};
}

Outcome determinism() {
  const auto d = generate_synthetic({.n_users = 51, .samples_per_user = 100, .separation = 1.0, .seed = kSeed});
  const auto run = [&](std::size_t threads, double& seconds) {
    ExperimentConfig c;
    c.global_seed = kSeed;
    c.threads = threads;
    const auto start = std::chrono::steady_clock::now();
    const auto grid = run_grid(d, c);
    seconds = seconds_since(start);
    std::ostringstream out;
    write_results_csv(out, grid, false);
    return out.str();
  };
  double s1 = 0.0, s4 = 0.0;
  const auto a = run(1, s1);
  const auto b = run(4, s4);
  const bool same = a == b;
  return {same && s1 < kGridSeconds && s4 < kGridSeconds,
          fmt::format("{} bytes, identical {}, 1 thread {:.1f} s, 4 threads {:.1f} s", a.size(), same, s1, s4)};
}

std::optional<Outcome> real_data() {
  const char* touch = std::getenv("BIOMAUTH_TOUCH_CSV");
  const char* sensors = std::getenv("BIOMAUTH_SENSOR_CSV");
  if (touch == nullptr || sensors == nullptr) return std::nullopt;
  ExperimentConfig c;
  c.source = CsvSource{touch, sensors};
  c.masks = {FeatureMask::full()};
  c.kinds = {ClassifierKind::kRF};
  c.global_seed = kSeed;
  const auto d = load_dataset(c);
  const auto grid = run_grid(d, c);
  const double a = grid.aggregate.find(FeatureMask::full(), ClassifierKind::kRF, Population::kAll)->mean.accuracy;
  return Outcome{a >= kRealRfLow && a <= kRealRfHigh,
                 fmt::format("{} users, RF accuracy {:.4f}", d.user_count(), a)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> check;
  };
  const std::vector<Criterion> criteria = {
      {"1 metric oracle equivalence", metric_oracle},
      {"2 EER boundary cases", eer_boundaries},
      {"3 split invariants", split_invariants},
      {"4 mask enumeration", mask_enumeration},
      {"5 gradient checks", gradient_checks},
      {"6 classifier sanity on synthetic data", classifier_sanity},
      {"7 determinism across thread counts", determinism},
  };
  bool all_passed = true;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    all_passed = all_passed && o.passed;
    fmt::print("{} criterion {}: {}\n", o.passed ? "PASS" : "FAIL", c.name, o.detail);
    std::fflush(stdout);
  }
  try {
    if (const auto o = real_data()) {
      fmt::print("{} criterion 8 real-data RF accuracy (conditional): {}\n", o->passed ? "PASS" : "FAIL", o->detail);
    } else {
      fmt::print("SKIP criterion 8 real-data RF accuracy (conditional): BIOMAUTH_TOUCH_CSV/BIOMAUTH_SENSOR_CSV not set\n");
    }
  } catch (const std::exception& e) {
    fmt::print("FAIL criterion 8 real-data RF accuracy (conditional): exception: {}\n", e.what());
  }
  return all_passed ? 0 : 1;
}
