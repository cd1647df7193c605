#include <gtest/gtest.h>

#include "biomauth/experiment.hpp"
#include "biomauth/selfcheck.hpp"

using namespace biomauth;
namespace sc = biomauth::selfcheck;

TEST(Selfcheck, OraclesAgreeWithLibrary) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto preds = sc::random_predictions(2 + seed * 7, seed);
    EXPECT_EQ(sc::oracle_confusion(preds), compute_confusion(preds));
    std::vector<ScoreLabel> scores;
    for (const auto& p : preds) scores.push_back({p.genuine_score, p.truth});
    EXPECT_NEAR(sc::oracle_eer(scores), compute_eer(scores).eer, 1e-12);
  }
}

TEST(Selfcheck, RandomPredictionsHaveBothClasses) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto preds = sc::random_predictions(2, seed);
    ASSERT_EQ(preds.size(), 2u);
    EXPECT_NE(preds[0].truth, preds[1].truth);
  }
}

TEST(Selfcheck, OracleRatesByCounting) {
  const std::vector<ScoreLabel> s = {{0.9, true}, {0.4, true}, {0.6, false}, {0.1, false}};
  const auto r = sc::oracle_rates(s, 0.5);
  EXPECT_EQ(r.far, 0.5);
  EXPECT_EQ(r.frr, 0.5);
  EXPECT_EQ(sc::oracle_eer(s), 0.5);
}

TEST(Selfcheck, DetectsWrongEer) {
  const std::vector<ScoreLabel> s = {{0.9, true}, {0.8, true}, {0.1, false}, {0.2, false}};
  EXPECT_EQ(sc::oracle_eer(s), 0.0);
  EXPECT_GT(std::abs(sc::oracle_eer(s) - 0.25), 1e-9);
}

TEST(Selfcheck, SoundSplitHasNoViolations) {
  const auto d = generate_synthetic({.n_users = 8, .samples_per_user = 20, .separation = 1.0, .seed = 1});
  const auto split = build_user_split(d, 3, 77);
  EXPECT_TRUE(sc::split_violations(d, split, 16, 4).empty());
}

TEST(Selfcheck, DetectsCorruptedSplits) {
  const auto d = generate_synthetic({.n_users = 8, .samples_per_user = 20, .separation = 1.0, .seed = 1});
  const auto good = build_user_split(d, 3, 77);

  auto leaked = good;
  leaked.test.push_back(leaked.train.front());
  EXPECT_FALSE(sc::split_violations(d, leaked, 16, 4).empty());

  auto mislabeled = good;
  mislabeled.train.front().label = 1 - mislabeled.train.front().label;
  EXPECT_FALSE(sc::split_violations(d, mislabeled, 16, 4).empty());

  auto missing = good;
  missing.test.pop_back();
  EXPECT_FALSE(sc::split_violations(d, missing, 16, 4).empty());

  auto wrong_source = good;
  for (auto& e : wrong_source.train) {
    if (e.label == 0) {
      e.source_user = e.source_user == 1 ? 2 : 1;
      break;
    }
  }
  EXPECT_FALSE(sc::split_violations(d, wrong_source, 16, 4).empty());

  EXPECT_FALSE(sc::split_violations(d, good, 15, 5).empty());
}

TEST(Selfcheck, SuitesPass) {
  const auto metric = sc::metric_oracle_suite(100, 3);
  EXPECT_TRUE(metric.passed);
  EXPECT_EQ(metric.failures.size(), 0u);
  EXPECT_GT(metric.checks, 0u);

  const auto gradient = sc::gradient_check_suite(2, 3);
  EXPECT_TRUE(gradient.passed);
  EXPECT_LT(gradient.worst, 1e-4);

  const auto split = sc::split_invariant_suite(2, 10, 3);
  EXPECT_TRUE(split.passed);
}
