#include "biomauth/selfcheck.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>

#include <fmt/format.h>

#include "biomauth/classifiers.hpp"

namespace biomauth::selfcheck {

namespace {

constexpr std::size_t kMaxReported = 5;

void record_failure(SuiteResult& result, std::string message) {
  result.passed = false;
  if (result.failures.size() < kMaxReported) result.failures.push_back(std::move(message));
}

double elapsed_seconds(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

ConfusionCounts oracle_confusion(std::span<const ScoredPrediction> preds) {
  ConfusionCounts c;
  for (const auto& p : preds) {
    c.tp += (p.decision && p.truth) ? 1 : 0;
    c.fp += (p.decision && !p.truth) ? 1 : 0;
    c.tn += (!p.decision && !p.truth) ? 1 : 0;
    c.fn += (!p.decision && p.truth) ? 1 : 0;
  }
  return c;
}

MetricReport oracle_metrics(std::span<const ScoredPrediction> preds) {
  const auto c = oracle_confusion(preds);
  MetricReport r;
  const double n = static_cast<double>(preds.size());
  r.accuracy = static_cast<double>(c.tp + c.tn) / n;
  r.precision_undefined = (c.tp + c.fp) == 0;
  r.recall_undefined = (c.tp + c.fn) == 0;
  r.precision = r.precision_undefined ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  r.recall = r.recall_undefined ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  r.f1 = (r.precision + r.recall == 0.0) ? 0.0 : 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

Rates oracle_rates(std::span<const ScoreLabel> scores, double threshold) {
  double fa = 0, fr = 0, genuine = 0, impostor = 0;
  for (const auto& s : scores) {
    const bool accept = s.score >= threshold;
    if (s.genuine) {
      genuine += 1;
      fr += accept ? 0 : 1;
    } else {
      impostor += 1;
      fa += accept ? 1 : 0;
    }
  }
  return {fa / impostor, fr / genuine};
}

double oracle_eer(std::span<const ScoreLabel> scores) {
  std::set<double> distinct;
  for (const auto& s : scores) distinct.insert(s.score);
  std::vector<double> thresholds;
  thresholds.push_back(-std::numeric_limits<double>::infinity());
  thresholds.insert(thresholds.end(), distinct.begin(), distinct.end());
  thresholds.push_back(std::numeric_limits<double>::infinity());

  Rates prev = oracle_rates(scores, thresholds.front());
  for (std::size_t k = 1; k < thresholds.size(); ++k) {
    const Rates cur = oracle_rates(scores, thresholds[k]);
    const double d0 = prev.far - prev.frr;
    const double d1 = cur.far - cur.frr;
    if (d1 == 0.0) return cur.far;
    if (d0 > 0.0 && d1 < 0.0) {
      // Intersection of the two straight segments FAR(t) and FRR(t).
      const double t = d0 / (d0 - d1);
      return prev.far + t * (cur.far - prev.far);
    }
    prev = cur;
  }
  return prev.far;
}

std::vector<ScoredPrediction> random_predictions(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> grid(0, 40);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> share(0.05, 0.95);
  const double genuine_share = share(rng);
  std::bernoulli_distribution genuine(genuine_share);
  std::vector<ScoredPrediction> preds(size);
  for (auto& p : preds) {
    p.truth = genuine(rng);
    p.genuine_score = grid(rng) / 40.0;
    p.decision = coin(rng);
    p.predicted_label = p.decision ? 1 : 0;
  }
  if (size >= 2) {
    preds[0].truth = true;
    preds[1].truth = false;
  }
  return preds;
}

std::vector<std::string> split_violations(const Dataset& dataset, const UserSplit& split,
                                          std::size_t genuine_train, std::size_t genuine_test) {
  std::vector<std::string> out;
  const UserId target = split.target_user;
  std::map<UserId, std::size_t> train_impostors;
  std::map<UserId, std::size_t> test_impostors;
  std::size_t train_genuine = 0;
  std::size_t test_genuine = 0;
  std::set<std::size_t> train_ids;
  std::set<std::size_t> test_ids;

  const auto check_entry = [&](const SplitEntry& e, std::string_view set) {
    const auto& sample = dataset.sample(e.sample_index);
    if (sample.user_id != e.source_user) {
      out.push_back(fmt::format("{} entry {} claims user {} but belongs to {}", set, e.sample_index,
                                e.source_user, sample.user_id));
    }
    if ((e.label == 1) != (sample.user_id == target)) {
      out.push_back(fmt::format("{} entry {} has label {}", set, e.sample_index, e.label));
    }
  };

  for (const auto& e : split.train) {
    check_entry(e, "train");
    if (!train_ids.insert(e.sample_index).second) {
      out.push_back(fmt::format("sample {} used twice in train", e.sample_index));
    }
    if (e.source_user == target) ++train_genuine;
    else ++train_impostors[e.source_user];
  }
  for (const auto& e : split.test) {
    check_entry(e, "test");
    if (!test_ids.insert(e.sample_index).second) {
      out.push_back(fmt::format("sample {} used twice in test", e.sample_index));
    }
    if (train_ids.contains(e.sample_index)) {
      out.push_back(fmt::format("sample {} appears in both train and test", e.sample_index));
    }
    if (e.source_user == target) ++test_genuine;
    else ++test_impostors[e.source_user];
  }

  if (train_genuine != genuine_train) {
    out.push_back(fmt::format("train has {} genuine, expected {}", train_genuine, genuine_train));
  }
  if (test_genuine != genuine_test) {
    out.push_back(fmt::format("test has {} genuine, expected {}", test_genuine, genuine_test));
  }
  // Round-robin over the other users: at least one each, counts differ by at most one.
  const std::size_t others = dataset.user_count() - 1;
  const std::size_t expected_impostors = std::max(genuine_train, others);
  std::size_t impostor_total = 0;
  for (const auto& [user, count] : train_impostors) impostor_total += count;
  if (impostor_total != expected_impostors) {
    out.push_back(fmt::format("train has {} impostors, expected {}", impostor_total, expected_impostors));
  }
  const std::size_t low = expected_impostors / others;
  const std::size_t high = (expected_impostors + others - 1) / others;
  for (const auto user : dataset.users()) {
    if (user == target) continue;
    const auto tr = train_impostors.contains(user) ? train_impostors.at(user) : 0;
    const auto te = test_impostors.contains(user) ? test_impostors.at(user) : 0;
    if (tr < low || tr > high) {
      out.push_back(fmt::format("user {} contributes {} training impostors, expected {}..{}", user, tr, low, high));
    }
    if (te != 1) out.push_back(fmt::format("user {} contributes {} test impostors", user, te));
  }
  if (train_impostors.contains(target) || test_impostors.contains(target)) {
    out.push_back("target user listed as impostor");
  }
  return out;
}

SuiteResult metric_oracle_suite(std::size_t sets, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = "metric-oracle";
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> sizes(2, 500);

  for (std::size_t s = 0; s < sets; ++s) {
    const auto preds = random_predictions(sizes(rng), rng());
    const auto expected_counts = oracle_confusion(preds);
    const auto expected = oracle_metrics(preds);
    std::vector<ScoreLabel> scores;
    for (const auto& p : preds) scores.push_back({p.genuine_score, p.truth});
    const double expected_eer = oracle_eer(scores);

    const auto counts = compute_confusion(preds);
    const auto got = evaluate_predictions(preds);
    ++result.checks;

    if (!(counts == expected_counts)) {
      record_failure(result, fmt::format("set {}: confusion counts differ", s));
    }
    const double ratio_error = std::max({std::abs(got.accuracy - expected.accuracy),
                                         std::abs(got.precision - expected.precision),
                                         std::abs(got.recall - expected.recall), std::abs(got.f1 - expected.f1)});
    const double eer_error = std::abs(got.eer - expected_eer);
    result.worst = std::max({result.worst, ratio_error, eer_error});
    if (ratio_error > 1e-12) record_failure(result, fmt::format("set {}: ratio error {:.3g}", s, ratio_error));
    if (eer_error > 1e-9) record_failure(result, fmt::format("set {}: eer error {:.3g}", s, eer_error));
    if (got.precision_undefined != expected.precision_undefined ||
        got.recall_undefined != expected.recall_undefined) {
      record_failure(result, fmt::format("set {}: undefined flags differ", s));
    }
  }
  result.seconds = elapsed_seconds(start);
  return result;
}

SuiteResult gradient_check_suite(std::size_t instances, std::uint64_t seed, double tolerance) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = "gradient-check";
  for (auto kind : {ClassifierKind::kLR, ClassifierKind::kMLP, ClassifierKind::kLSTM}) {
    for (std::size_t i = 0; i < instances; ++i) {
      const double error = gradient_check(kind, seed * 1000 + i);
      ++result.checks;
      result.worst = std::max(result.worst, error);
      if (!(error < tolerance)) {
        record_failure(result, fmt::format("{} instance {}: relative error {:.3g}", kind_name(kind), i, error));
      }
    }
  }
  result.seconds = elapsed_seconds(start);
  return result;
}

SuiteResult split_invariant_suite(std::size_t seeds, std::size_t users, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  SuiteResult result;
  result.name = "split-invariants";
  const auto dataset = generate_synthetic({.n_users = users, .samples_per_user = 100, .separation = 1.0, .seed = seed});
  for (std::size_t s = 0; s < seeds; ++s) {
    for (const auto user : dataset.users()) {
      const auto split = build_user_split(dataset, user, seed * 7919 + s);
      ++result.checks;
      for (auto& v : split_violations(dataset, split, 80, 20)) {
        record_failure(result, fmt::format("seed {} user {}: {}", s, user, v));
      }
    }
  }
  result.seconds = elapsed_seconds(start);
  return result;
}

std::vector<SuiteResult> run_all() {
  return {metric_oracle_suite(), gradient_check_suite(), split_invariant_suite()};
}

}  // namespace biomauth::selfcheck
