#include <cmath>
#include <numbers>

#include "biomauth/classifiers.hpp"

namespace biomauth::detail {

NaiveBayesParams fit_naive_bayes(const Eigen::MatrixXd& x, std::span<const int> class_index,
                                 std::size_t n_classes, const HyperParams& hyper) {
  const auto classes = static_cast<Eigen::Index>(n_classes);
  const Eigen::Index d = x.cols();
  const auto n = static_cast<double>(x.rows());

  NaiveBayesParams p;
  p.means = Eigen::MatrixXd::Zero(classes, d);
  p.variances = Eigen::MatrixXd::Zero(classes, d);
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(classes);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = class_index[static_cast<std::size_t>(i)];
    p.means.row(c) += x.row(i);
    counts[c] += 1.0;
  }
  for (Eigen::Index c = 0; c < classes; ++c) p.means.row(c) /= counts[c];
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const int c = class_index[static_cast<std::size_t>(i)];
    p.variances.row(c) += (x.row(i) - p.means.row(c)).array().square().matrix();
  }
  for (Eigen::Index c = 0; c < classes; ++c) p.variances.row(c) /= counts[c];

  const Eigen::RowVectorXd overall_mean = x.colwise().mean();
  const double max_variance =
      (x.rowwise() - overall_mean).array().square().colwise().sum().maxCoeff() / n;
  // Guard against an all-constant training set, which would floor at zero.
  const double floor = hyper.nb_var_smoothing * (max_variance > 0.0 ? max_variance : 1.0);
  p.variances = p.variances.cwiseMax(floor);
  p.log_priors = (counts / n).array().log();
  return p;
}

ClassEvaluation evaluate(const NaiveBayesParams& p, const Eigen::VectorXd& x, std::size_t /*n_classes*/) {
  const Eigen::Index classes = p.means.rows();
  Eigen::VectorXd joint(classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const Eigen::ArrayXd var = p.variances.row(c).transpose().array();
    const Eigen::ArrayXd diff = x.array() - p.means.row(c).transpose().array();
    joint[c] = p.log_priors[c] -
               0.5 * ((2.0 * std::numbers::pi * var).log() + diff.square() / var).sum();
  }
  const double peak = joint.maxCoeff();
  Eigen::VectorXd posterior = (joint.array() - peak).exp();
  posterior /= posterior.sum();
  return {std::move(joint), std::move(posterior)};
}

}  // namespace biomauth::detail
