#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "biomauth/classifiers.hpp"
#include "biomauth/gradients.hpp"

namespace biomauth::detail {

// Pegasos: stochastic sub-gradient descent on
//   lambda/2 ||w||^2 + mean(hinge),  lambda = 1 / (C n),
// with the bias folded in as a constant feature. The returned hyperplanes
// average the iterates of the second half of training.
LinearSvmParams fit_linear_svm(const Eigen::MatrixXd& x, std::span<const int> class_index,
                               std::size_t n_classes, const HyperParams& hyper) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const auto classes = static_cast<Eigen::Index>(n_classes);
  const double lambda = 1.0 / (hyper.svm_regularization * static_cast<double>(n));
  const double radius = 1.0 / std::sqrt(lambda);

  Eigen::MatrixXd augmented(n, d + 1);
  augmented.leftCols(d) = x;
  augmented.col(d).setOnes();

  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(classes, d + 1);
  Eigen::MatrixXd average = Eigen::MatrixXd::Zero(classes, d + 1);
  std::size_t averaged = 0;

  std::mt19937_64 rng(hyper.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  const std::size_t total_steps = hyper.svm_epochs * static_cast<std::size_t>(n);
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < hyper.svm_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (auto row : order) {
      ++t;
      const double eta = 1.0 / (lambda * static_cast<double>(t));
      const auto sample = augmented.row(row);
      const Eigen::VectorXd margins = w * sample.transpose();
      w *= 1.0 - eta * lambda;
      for (Eigen::Index c = 0; c < classes; ++c) {
        const double y = class_index[static_cast<std::size_t>(row)] == c ? 1.0 : -1.0;
        if (y * margins[c] < 1.0) w.row(c) += eta * y * sample;
        const double norm = w.row(c).norm();
        if (norm > radius) w.row(c) *= radius / norm;
      }
      if (2 * t > total_steps) {
        average += w;
        ++averaged;
      }
    }
  }
  if (averaged > 0) average /= static_cast<double>(averaged);
  return {averaged > 0 ? average : w};
}

ClassEvaluation evaluate(const LinearSvmParams& p, const Eigen::VectorXd& x, std::size_t /*n_classes*/) {
  const Eigen::Index d = x.size();
  Eigen::VectorXd margins = p.weights.leftCols(d) * x + p.weights.col(d);
  Eigen::VectorXd scores = margins.unaryExpr([](double m) { return sigmoid(m); });
  return {std::move(margins), std::move(scores)};
}

}  // namespace biomauth::detail
