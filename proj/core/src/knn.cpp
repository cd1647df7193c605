#include <algorithm>
#include <numeric>
#include <utility>

#include "biomauth/classifiers.hpp"

namespace biomauth::detail {

KnnParams fit_knn(const Eigen::MatrixXd& x, std::span<const int> class_index, const HyperParams& hyper) {
  return {x, std::vector<int>(class_index.begin(), class_index.end()), hyper.knn_k};
}

// Neighbors are ordered by (squared distance, class index), so the choice
// among equidistant points never depends on storage order.
ClassEvaluation evaluate(const KnnParams& p, const Eigen::VectorXd& x, std::size_t n_classes) {
  const auto n = static_cast<std::size_t>(p.points.rows());
  std::vector<std::pair<double, int>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    neighbors[i] = {(p.points.row(static_cast<Eigen::Index>(i)).transpose() - x).squaredNorm(),
                    p.class_index[i]};
  }
  const std::size_t k = std::min(p.k, n);
  std::partial_sort(neighbors.begin(), neighbors.begin() + static_cast<std::ptrdiff_t>(k), neighbors.end());

  Eigen::VectorXd votes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_classes));
  for (std::size_t i = 0; i < k; ++i) votes[neighbors[i].second] += 1.0;
  votes /= static_cast<double>(k);
  return {votes, votes};
}

}  // namespace biomauth::detail
