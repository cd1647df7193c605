#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "biomauth/classifiers.hpp"

namespace biomauth::detail {

namespace {

using Node = RandomForestParams::Node;

int majority(std::span<const std::size_t> counts) {
  return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const int> y, std::size_t n_classes,
              std::optional<std::size_t> max_depth, std::mt19937_64& rng)
      : x_(x), y_(y), n_classes_(n_classes), max_depth_(max_depth), rng_(rng),
        features_tried_(static_cast<std::size_t>(
            std::ceil(std::sqrt(static_cast<double>(x.cols()))))) {}

  std::vector<Node> build(std::vector<int> rows) {
    nodes_.clear();
    grow(rows, 0, rows.size(), 0);
    return std::move(nodes_);
  }

 private:
  struct Split {
    int feature = -1;
    double threshold = 0.0;
    double purity = -1.0;  // sum over children of (sum of squared counts) / size
  };

  int grow(std::vector<int>& rows, std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();

    std::vector<std::size_t> counts(n_classes_, 0);
    for (std::size_t i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(y_[rows[i]])];
    const int leaf_class = majority(counts);
    const bool pure = counts[static_cast<std::size_t>(leaf_class)] == end - begin;
    const bool depth_reached = max_depth_ && depth >= *max_depth_;
    if (pure || end - begin < 2 || depth_reached) {
      nodes_[id].leaf_class = leaf_class;
      return id;
    }

    const Split split = best_split(rows, begin, end, counts);
    if (split.feature < 0) {
      nodes_[id].leaf_class = leaf_class;
      return id;
    }
    const auto mid = std::partition(rows.begin() + static_cast<std::ptrdiff_t>(begin),
                                    rows.begin() + static_cast<std::ptrdiff_t>(end), [&](int r) {
                                      return x_(r, split.feature) <= split.threshold;
                                    }) - rows.begin();
    const int left = grow(rows, begin, static_cast<std::size_t>(mid), depth + 1);
    const int right = grow(rows, static_cast<std::size_t>(mid), end, depth + 1);
    Node& node = nodes_[id];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    node.leaf_class = leaf_class;
    return id;
  }

  // Tries ceil(sqrt(d)) random features; keeps drawing past that only while
  // every feature tried so far was constant on this node.
  Split best_split(const std::vector<int>& rows, std::size_t begin, std::size_t end,
                   const std::vector<std::size_t>& counts) {
    std::vector<int> candidates(static_cast<std::size_t>(x_.cols()));
    std::iota(candidates.begin(), candidates.end(), 0);
    std::shuffle(candidates.begin(), candidates.end(), rng_);

    const std::size_t n = end - begin;
    std::vector<std::pair<double, int>> column(n);
    std::vector<std::size_t> left(n_classes_);
    std::vector<std::size_t> right(n_classes_);
    double total_squares = 0.0;
    for (auto c : counts) total_squares += static_cast<double>(c * c);

    Split best;
    for (std::size_t tried = 0; tried < candidates.size(); ++tried) {
      if (tried >= features_tried_ && best.feature >= 0) break;
      const int f = candidates[tried];
      for (std::size_t i = 0; i < n; ++i) {
        const int r = rows[begin + i];
        column[i] = {x_(r, f), y_[r]};
      }
      std::sort(column.begin(), column.end());
      std::fill(left.begin(), left.end(), 0);
      right = counts;
      double left_squares = 0.0;
      double right_squares = total_squares;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto c = static_cast<std::size_t>(column[i].second);
        left_squares += 2.0 * static_cast<double>(left[c]) + 1.0;
        right_squares -= 2.0 * static_cast<double>(right[c]) - 1.0;
        ++left[c];
        --right[c];
        if (column[i].first == column[i + 1].first) continue;
        const double purity = left_squares / static_cast<double>(i + 1) +
                              right_squares / static_cast<double>(n - i - 1);
        if (purity > best.purity) {
          double threshold = 0.5 * (column[i].first + column[i + 1].first);
          if (!(threshold < column[i + 1].first)) threshold = column[i].first;
          best = {f, threshold, purity};
        }
      }
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  std::span<const int> y_;
  std::size_t n_classes_;
  std::optional<std::size_t> max_depth_;
  std::mt19937_64& rng_;
  std::size_t features_tried_;
  std::vector<Node> nodes_;
};

}  // namespace

RandomForestParams fit_random_forest(const Eigen::MatrixXd& x, std::span<const int> class_index,
                                     std::size_t n_classes, const HyperParams& hyper) {
  std::mt19937_64 rng(hyper.seed);
  const auto n = static_cast<int>(x.rows());
  std::uniform_int_distribution<int> draw(0, n - 1);
  TreeBuilder builder(x, class_index, n_classes, hyper.rf_max_depth, rng);

  RandomForestParams forest;
  forest.trees.reserve(hyper.rf_trees);
  std::vector<int> bootstrap(static_cast<std::size_t>(n));
  for (std::size_t t = 0; t < hyper.rf_trees; ++t) {
    for (auto& r : bootstrap) r = draw(rng);
    forest.trees.push_back(builder.build(bootstrap));
  }
  return forest;
}

ClassEvaluation evaluate(const RandomForestParams& p, const Eigen::VectorXd& x, std::size_t n_classes) {
  Eigen::VectorXd votes = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_classes));
  for (const auto& tree : p.trees) {
    int id = 0;
    while (tree[static_cast<std::size_t>(id)].feature >= 0) {
      const auto& node = tree[static_cast<std::size_t>(id)];
      id = x[node.feature] <= node.threshold ? node.left : node.right;
    }
    votes[tree[static_cast<std::size_t>(id)].leaf_class] += 1.0;
  }
  votes /= static_cast<double>(std::max<std::size_t>(p.trees.size(), 1));
  return {votes, votes};
}

}  // namespace biomauth::detail
