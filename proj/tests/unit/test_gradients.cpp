#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biomauth/classifiers.hpp"
#include "biomauth/errors.hpp"
#include "biomauth/gradients.hpp"

using namespace biomauth;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

double ref_sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double bce(double z, double y) {
  const double p = ref_sigmoid(z);
  return -(y * std::log(p) + (1.0 - y) * std::log(1.0 - p));
}

// Column-major element (r, c) of a rows x cols block starting at `offset`.
double at(const VectorXd& p, Index offset, Index rows, Index r, Index c) { return p[offset + c * rows + r]; }

double reference_logistic_loss(const VectorXd& p, const MatrixXd& x, const MatrixXd& y) {
  const Index d = x.cols(), k = y.cols();
  double total = 0.0;
  for (Index n = 0; n < x.rows(); ++n) {
    for (Index o = 0; o < k; ++o) {
      double z = p[k * d + o];
      for (Index j = 0; j < d; ++j) z += at(p, 0, k, o, j) * x(n, j);
      total += bce(z, y(n, o));
    }
  }
  return total / static_cast<double>(x.rows());
}

double reference_mlp_loss(const VectorXd& p, const std::vector<Index>& sizes, const MatrixXd& x, const MatrixXd& y) {
  double total = 0.0;
  for (Index n = 0; n < x.rows(); ++n) {
    std::vector<double> a;
    for (Index j = 0; j < x.cols(); ++j) a.push_back(x(n, j));
    Index offset = 0;
    for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
      const Index fan_in = sizes[l], fan_out = sizes[l + 1];
      std::vector<double> z(static_cast<std::size_t>(fan_out));
      for (Index o = 0; o < fan_out; ++o) {
        double s = p[offset + fan_out * fan_in + o];
        for (Index i = 0; i < fan_in; ++i) s += at(p, offset, fan_out, o, i) * a[static_cast<std::size_t>(i)];
        const bool last = l + 2 == sizes.size();
        z[static_cast<std::size_t>(o)] = last ? s : std::max(s, 0.0);
      }
      offset += fan_out * fan_in + fan_out;
      a = z;
    }
    double peak = -INFINITY;
    for (double v : a) peak = std::max(peak, v);
    double sum = 0.0;
    for (double v : a) sum += std::exp(v - peak);
    for (std::size_t o = 0; o < a.size(); ++o) {
      total -= y(n, static_cast<Index>(o)) * (a[o] - peak - std::log(sum));
    }
  }
  return total / static_cast<double>(x.rows());
}

double reference_lstm_loss(const VectorXd& p, Index d, Index h, Index steps, const MatrixXd& x, const MatrixXd& y) {
  const Index g = 4 * h;
  const Index w_off = 0, u_off = g * d, b_off = g * d + g * h, head_off = b_off + g, hb_off = head_off + h;
  double total = 0.0;
  for (Index n = 0; n < x.rows(); ++n) {
    std::vector<double> hs(static_cast<std::size_t>(h), 0.0), cs(static_cast<std::size_t>(h), 0.0);
    for (Index t = 0; t < steps; ++t) {
      std::vector<double> pre(static_cast<std::size_t>(g));
      for (Index r = 0; r < g; ++r) {
        double s = p[b_off + r];
        for (Index j = 0; j < d; ++j) s += at(p, w_off, g, r, j) * x(n, t * d + j);
        for (Index j = 0; j < h; ++j) s += at(p, u_off, g, r, j) * hs[static_cast<std::size_t>(j)];
        pre[static_cast<std::size_t>(r)] = s;
      }
      for (Index u = 0; u < h; ++u) {
        const auto k = static_cast<std::size_t>(u);
        const double i = ref_sigmoid(pre[k]);
        const double f = ref_sigmoid(pre[static_cast<std::size_t>(h) + k]);
        const double c = std::tanh(pre[static_cast<std::size_t>(2 * h) + k]);
        const double o = ref_sigmoid(pre[static_cast<std::size_t>(3 * h) + k]);
        cs[k] = f * cs[k] + i * c;
        hs[k] = o * std::tanh(cs[k]);
      }
    }
    double z = p[hb_off];
    for (Index u = 0; u < h; ++u) z += p[head_off + u] * hs[static_cast<std::size_t>(u)];
    total += bce(z, y(n, 0));
  }
  return total / static_cast<double>(x.rows());
}

// Central differences, independent of the library helper.
VectorXd numeric_gradient(const Objective& objective, VectorXd params, const MatrixXd& x, const MatrixXd& y) {
  const double h = 1e-5;
  VectorXd out(params.size());
  for (Index i = 0; i < params.size(); ++i) {
    const double keep = params[i];
    params[i] = keep + h;
    const double up = objective.evaluate(params, x, y).loss;
    params[i] = keep - h;
    const double down = objective.evaluate(params, x, y).loss;
    params[i] = keep;
    out[i] = (up - down) / (2 * h);
  }
  return out;
}

double worst_relative(const VectorXd& a, const VectorXd& b) {
  double worst = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(a[i] - b[i]) / std::max({std::abs(a[i]), std::abs(b[i]), 1e-6}));
  }
  return worst;
}

MatrixXd random_matrix(Index r, Index c, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  return MatrixXd::NullaryExpr(r, c, [&] { return n(rng); });
}

MatrixXd random_bits(Index r, Index c, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.5);
  return MatrixXd::NullaryExpr(r, c, [&] { return coin(rng) ? 1.0 : 0.0; });
}

}  // namespace

TEST(Gradients, ZeroWeightLogisticBiasGradientIsPredictionMinusLabel) {
  const LogisticObjective objective(4, 3);
  const VectorXd params = VectorXd::Zero(objective.parameter_count());
  const MatrixXd x = MatrixXd::Zero(1, 4);
  MatrixXd y(1, 3);
  y << 1.0, 0.0, 1.0;
  const auto lg = objective.evaluate(params, x, y);
  for (Index o = 0; o < 3; ++o) EXPECT_EQ(lg.gradient[12 + o], 0.5 - y(0, o));
  for (Index i = 0; i < 12; ++i) EXPECT_EQ(lg.gradient[i], 0.0);
  EXPECT_NEAR(lg.loss, 3 * std::log(2.0), 1e-15);
}

TEST(Gradients, LogisticLossAndGradientMatchReference) {
  std::mt19937_64 rng(1);
  const LogisticObjective objective(5, 3);
  const VectorXd p = random_matrix(objective.parameter_count(), 1, rng, 0.5);
  const MatrixXd x = random_matrix(6, 5, rng);
  const MatrixXd y = random_bits(6, 3, rng);
  const auto lg = objective.evaluate(p, x, y);
  EXPECT_NEAR(lg.loss, reference_logistic_loss(p, x, y), 1e-12);
  EXPECT_LT(worst_relative(lg.gradient, numeric_gradient(objective, p, x, y)), 1e-6);
}

TEST(Gradients, MlpBatchFourWithinTolerance) {
  std::mt19937_64 rng(2);
  const MlpObjective objective(5, {6, 4}, 3);
  const VectorXd p = random_matrix(objective.parameter_count(), 1, rng, 0.5);
  const MatrixXd x = random_matrix(4, 5, rng);
  MatrixXd y = MatrixXd::Zero(4, 3);
  for (Index n = 0; n < 4; ++n) y(n, n % 3) = 1.0;
  const auto lg = objective.evaluate(p, x, y);
  EXPECT_NEAR(lg.loss, reference_mlp_loss(p, objective.layer_sizes(), x, y), 1e-12);
  EXPECT_LT(worst_relative(lg.gradient, numeric_gradient(objective, p, x, y)), 1e-4);
  EXPECT_LT(gradient_check(ClassifierKind::kMLP, 5, {.batch = 4}), 1e-4);
}

TEST(Gradients, LstmCellBatchTwoWithinTolerance) {
  std::mt19937_64 rng(3);
  for (Index steps : {1, 3}) {
    const LstmObjective objective(4, 5, steps);
    const VectorXd p = random_matrix(objective.parameter_count(), 1, rng, 0.5);
    const MatrixXd x = random_matrix(2, 4 * steps, rng);
    const MatrixXd y = random_bits(2, 1, rng);
    const auto lg = objective.evaluate(p, x, y);
    EXPECT_NEAR(lg.loss, reference_lstm_loss(p, 4, 5, steps, x, y), 1e-12) << "steps " << steps;
    EXPECT_LT(worst_relative(lg.gradient, numeric_gradient(objective, p, x, y)), 1e-4) << "steps " << steps;
  }
  EXPECT_LT(gradient_check(ClassifierKind::kLSTM, 9, {.batch = 2}), 1e-4);
}

TEST(Gradients, LibraryCheckAgreesWithLocalOracle) {
  std::mt19937_64 rng(4);
  const LogisticObjective objective(3, 2);
  const VectorXd p = random_matrix(objective.parameter_count(), 1, rng);
  const MatrixXd x = random_matrix(5, 3, rng);
  const MatrixXd y = random_bits(5, 2, rng);
  const double local = worst_relative(objective.evaluate(p, x, y).gradient, numeric_gradient(objective, p, x, y));
  EXPECT_NEAR(max_relative_gradient_error(objective, p, x, y), local, 1e-12);
}

TEST(Gradients, CheckRejectsNonGradientKinds) {
  EXPECT_THROW(gradient_check(ClassifierKind::kRF, 1), ConfigError);
  for (auto kind : {ClassifierKind::kLR, ClassifierKind::kMLP, ClassifierKind::kLSTM}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) EXPECT_LT(gradient_check(kind, seed), 1e-4) << kind_name(kind);
  }
}

TEST(Gradients, ShapeMismatchIsDimensionError) {
  const LogisticObjective objective(3, 2);
  EXPECT_THROW(objective.evaluate(VectorXd::Zero(3), MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 2)), DimensionError);
  EXPECT_THROW(objective.evaluate(VectorXd::Zero(8), MatrixXd::Zero(2, 4), MatrixXd::Zero(2, 2)), DimensionError);
}

TEST(Adam, ReducesLossDeterministically) {
  std::mt19937_64 rng(6);
  const LogisticObjective objective(2, 1);
  const MatrixXd x = random_matrix(64, 2, rng);
  MatrixXd y(64, 1);
  for (Index n = 0; n < 64; ++n) y(n, 0) = x(n, 0) + x(n, 1) > 0 ? 1.0 : 0.0;
  const VectorXd start = VectorXd::Zero(3);
  const AdamOptions options{.learning_rate = 0.05, .epochs = 50, .batch_size = 16, .seed = 3};
  const auto a = train_adam(objective, start, x, y, options);
  const auto b = train_adam(objective, start, x, y, options);
  EXPECT_EQ(a, b);
  EXPECT_LT(objective.evaluate(a, x, y).loss, 0.5 * objective.evaluate(start, x, y).loss);
}

TEST(Adam, NonFiniteLossNamesEpoch) {
  const LogisticObjective objective(1, 1);
  MatrixXd x(2, 1);
  x << 1e308, -1e308;
  MatrixXd y(2, 1);
  y << 1.0, 0.0;
  VectorXd start(2);
  start << 10.0, 0.0;
  try {
    train_adam(objective, start, x, y, {});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos) << e.what();
  }
}

TEST(Activations, StableAtExtremes) {
  EXPECT_EQ(sigmoid(0.0), 0.5);
  EXPECT_EQ(sigmoid(-1000.0), 0.0);
  EXPECT_EQ(sigmoid(1000.0), 1.0);
  EXPECT_EQ(softplus(1000.0), 1000.0);
  EXPECT_NEAR(softplus(0.0), std::log(2.0), 1e-15);
  EXPECT_GE(softplus(-1000.0), 0.0);
}
