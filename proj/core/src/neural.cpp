#include <cmath>
#include <random>

#include "biomauth/classifiers.hpp"
#include "biomauth/gradients.hpp"

namespace biomauth::detail {

namespace {

Eigen::MatrixXd one_hot(std::span<const int> class_index, std::size_t n_classes) {
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(class_index.size()),
                                            static_cast<Eigen::Index>(n_classes));
  for (std::size_t i = 0; i < class_index.size(); ++i) y(static_cast<Eigen::Index>(i), class_index[i]) = 1.0;
  return y;
}

AdamOptions adam_options(const HyperParams& hyper) {
  return {hyper.learning_rate, hyper.nn_epochs, hyper.batch_size, hyper.seed};
}

}  // namespace

LogisticParams fit_logistic(const Eigen::MatrixXd& x, std::span<const int> class_index,
                            std::size_t n_classes, const HyperParams& hyper) {
  const LogisticObjective objective(x.cols(), static_cast<Eigen::Index>(n_classes));
  Eigen::VectorXd init = Eigen::VectorXd::Zero(objective.parameter_count());
  return {train_adam(objective, std::move(init), x, one_hot(class_index, n_classes), adam_options(hyper))};
}

MlpParams fit_mlp(const Eigen::MatrixXd& x, std::span<const int> class_index, std::size_t n_classes,
                  const HyperParams& hyper) {
  const MlpObjective objective(x.cols(), hyper.mlp_hidden, static_cast<Eigen::Index>(n_classes));
  std::mt19937_64 rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  Eigen::VectorXd init = Eigen::VectorXd::Zero(objective.parameter_count());
  const auto& sizes = objective.layer_sizes();
  Eigen::Index offset = 0;
  for (std::size_t l = 1; l < sizes.size(); ++l) {
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / static_cast<double>(sizes[l - 1])));
    for (Eigen::Index i = 0; i < sizes[l] * sizes[l - 1]; ++i) init[offset + i] = he(rng);
    offset += sizes[l] * (sizes[l - 1] + 1);
  }
  return {hyper.mlp_hidden,
          train_adam(objective, std::move(init), x, one_hot(class_index, n_classes), adam_options(hyper))};
}

LstmParams fit_lstm(const Eigen::MatrixXd& x, std::span<const int> class_index, const HyperParams& hyper) {
  const Eigen::Index h = hyper.lstm_hidden;
  const LstmObjective objective(x.cols(), h, 1);
  std::mt19937_64 rng(hyper.seed ^ 0x9e3779b97f4a7c15ULL);
  const double bound = 1.0 / std::sqrt(static_cast<double>(h));
  std::uniform_real_distribution<double> uniform(-bound, bound);
  Eigen::VectorXd init = Eigen::VectorXd::NullaryExpr(objective.parameter_count(), [&] { return uniform(rng); });
  // Forget-gate bias starts at 1.
  const Eigen::Index bias_offset = 4 * h * x.cols() + 4 * h * h;
  init.segment(bias_offset + h, h).array() += 1.0;

  Eigen::MatrixXd y(static_cast<Eigen::Index>(class_index.size()), 1);
  for (std::size_t i = 0; i < class_index.size(); ++i) y(static_cast<Eigen::Index>(i), 0) = class_index[i];
  return {h, train_adam(objective, std::move(init), x, y, adam_options(hyper))};
}

ClassEvaluation evaluate(const LogisticParams& p, const Eigen::VectorXd& x, std::size_t n_classes) {
  const LogisticObjective objective(x.size(), static_cast<Eigen::Index>(n_classes));
  Eigen::VectorXd z = objective.logits(p.params, x.transpose()).row(0).transpose();
  Eigen::VectorXd scores = z.unaryExpr([](double v) { return sigmoid(v); });
  return {std::move(z), std::move(scores)};
}

ClassEvaluation evaluate(const MlpParams& p, const Eigen::VectorXd& x, std::size_t n_classes) {
  const MlpObjective objective(x.size(), p.hidden, static_cast<Eigen::Index>(n_classes));
  Eigen::VectorXd z = objective.logits(p.params, x.transpose()).row(0).transpose();
  Eigen::VectorXd probs = (z.array() - z.maxCoeff()).exp();
  probs /= probs.sum();
  return {std::move(z), std::move(probs)};
}

ClassEvaluation evaluate(const LstmParams& p, const Eigen::VectorXd& x, std::size_t /*n_classes*/) {
  const LstmObjective objective(x.size(), p.hidden, 1);
  const double z = objective.logits(p.params, x.transpose())(0, 0);
  const double genuine = sigmoid(z);
  Eigen::VectorXd ranking(2);
  ranking << -z, z;
  Eigen::VectorXd scores(2);
  scores << 1.0 - genuine, genuine;
  return {std::move(ranking), std::move(scores)};
}

}  // namespace biomauth::detail
