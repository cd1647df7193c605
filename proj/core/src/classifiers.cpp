#include "biomauth/classifiers.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "biomauth/errors.hpp"
#include "biomauth/gradients.hpp"

namespace biomauth {

std::string_view kind_name(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::kRF: return "RF";
    case ClassifierKind::kSVM: return "SVM";
    case ClassifierKind::kKNN: return "KNN";
    case ClassifierKind::kNB: return "NB";
    case ClassifierKind::kLR: return "LR";
    case ClassifierKind::kMLP: return "MLP";
    case ClassifierKind::kLSTM: return "LSTM";
  }
  return "?";
}

ClassifierKind parse_kind(std::string_view text) {
  std::string upper;
  for (char c : text) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (upper == "LSTM-RNN") return ClassifierKind::kLSTM;
  for (auto kind : kAllKinds) {
    if (upper == kind_name(kind)) return kind;
  }
  throw ConfigError(fmt::format("unknown classifier '{}'", text));
}

void HyperParams::validate() const {
  const auto positive = [](std::size_t v, std::string_view name) {
    if (v == 0) throw ConfigError(fmt::format("{} must be at least 1", name));
  };
  positive(knn_k, "knn_k");
  positive(rf_trees, "rf_trees");
  if (rf_max_depth) positive(*rf_max_depth, "rf_max_depth");
  positive(svm_epochs, "svm_epochs");
  positive(nn_epochs, "nn_epochs");
  positive(batch_size, "batch_size");
  positive(static_cast<std::size_t>(std::max<Eigen::Index>(lstm_hidden, 0)), "lstm_hidden");
  if (mlp_hidden.empty()) throw ConfigError("mlp_hidden needs at least one layer");
  for (auto h : mlp_hidden) positive(static_cast<std::size_t>(std::max<Eigen::Index>(h, 0)), "mlp_hidden");
  if (!(svm_regularization > 0.0)) throw ConfigError("svm_regularization must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(nb_var_smoothing > 0.0)) throw ConfigError("nb_var_smoothing must be positive");
  if (!(lr_threshold > 0.0 && lr_threshold < 1.0)) throw ConfigError("lr_threshold must lie in (0,1)");
}

TrainedModel::TrainedModel(ClassifierKind kind, std::vector<Label> classes, std::size_t input_dimension,
                           std::optional<ScalerParams> scaler, double decision_threshold, ModelParams params)
    : kind_(kind),
      classes_(std::move(classes)),
      input_dimension_(input_dimension),
      scaler_(std::move(scaler)),
      decision_threshold_(decision_threshold),
      params_(std::move(params)) {}

ClassEvaluation TrainedModel::evaluate(std::span<const double> x) const {
  if (x.size() != input_dimension_) {
    throw DimensionError(fmt::format("{} model expects {} features, got {}", kind_name(kind_),
                                     input_dimension_, x.size()));
  }
  Eigen::VectorXd input = Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  if (scaler_) input = apply_scaler(*scaler_, input);
  return std::visit([&](const auto& p) { return detail::evaluate(p, input, classes_.size()); }, params_);
}

Label TrainedModel::predicted_label(const ClassEvaluation& evaluation) const {
  Eigen::Index best = 0;
  evaluation.ranking.maxCoeff(&best);  // first maximum, i.e. the smaller label
  return classes_[static_cast<std::size_t>(best)];
}

namespace {

// Rows sorted by (label, feature values lexicographically).
std::vector<Eigen::Index> canonical_order(const Eigen::MatrixXd& x, std::span<const Label> labels) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const auto la = labels[static_cast<std::size_t>(a)];
    const auto lb = labels[static_cast<std::size_t>(b)];
    if (la != lb) return la < lb;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
    }
    return false;
  });
  return order;
}

}  // namespace

TrainedModel fit(ClassifierKind kind, const Eigen::MatrixXd& features, std::span<const Label> labels,
                 const HyperParams& hyper) {
  hyper.validate();
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw DimensionError(fmt::format("{} feature rows but {} labels", features.rows(), labels.size()));
  }
  if (features.rows() == 0 || features.cols() == 0) throw DimensionError("empty training matrix");
  if (!features.allFinite()) throw TrainingError("training features must be finite");

  std::vector<Label> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) {
    throw TrainingError(fmt::format("{} needs at least two classes in the training labels", kind_name(kind)));
  }
  if (kind == ClassifierKind::kLSTM && (classes.front() != 0 || classes.back() != 1 || classes.size() != 2)) {
    throw TrainingError("LSTM is trained on binary 0/1 genuine labels");
  }

  const auto order = canonical_order(features, labels);
  Eigen::MatrixXd x(features.rows(), features.cols());
  std::vector<int> class_index(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    x.row(static_cast<Eigen::Index>(i)) = features.row(order[i]);
    const auto label = labels[static_cast<std::size_t>(order[i])];
    class_index[i] = static_cast<int>(std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
  }

  std::optional<ScalerParams> scaler;
  if (kind == ClassifierKind::kLSTM || hyper.scale_inputs) {
    scaler = fit_scaler(x);
    x = apply_scaler_rows(*scaler, x);
  }

  const std::size_t n_classes = classes.size();
  ModelParams params = [&]() -> ModelParams {
    switch (kind) {
      case ClassifierKind::kRF: return detail::fit_random_forest(x, class_index, n_classes, hyper);
      case ClassifierKind::kSVM: return detail::fit_linear_svm(x, class_index, n_classes, hyper);
      case ClassifierKind::kKNN: return detail::fit_knn(x, class_index, hyper);
      case ClassifierKind::kNB: return detail::fit_naive_bayes(x, class_index, n_classes, hyper);
      case ClassifierKind::kLR: return detail::fit_logistic(x, class_index, n_classes, hyper);
      case ClassifierKind::kMLP: return detail::fit_mlp(x, class_index, n_classes, hyper);
      case ClassifierKind::kLSTM: return detail::fit_lstm(x, class_index, hyper);
    }
    throw ConfigError("unknown classifier kind");
  }();

  return TrainedModel(kind, std::move(classes), static_cast<std::size_t>(features.cols()), std::move(scaler),
                      hyper.lr_threshold, std::move(params));
}

ScoredPrediction predict(const TrainedModel& model, std::span<const double> x, Label target_user) {
  const auto evaluation = model.evaluate(x);
  ScoredPrediction out;
  if (model.kind() == ClassifierKind::kLSTM) {
    out.genuine_score = evaluation.scores[1];
    out.decision = out.genuine_score >= model.decision_threshold();
    out.predicted_label = out.decision ? 1 : 0;
    return out;
  }
  const auto classes = model.classes();
  const auto it = std::lower_bound(classes.begin(), classes.end(), target_user);
  if (it == classes.end() || *it != target_user) {
    throw ConfigError(fmt::format("target user {} is not among the model's classes", target_user));
  }
  out.predicted_label = model.predicted_label(evaluation);
  out.genuine_score = std::clamp(evaluation.scores[it - classes.begin()], 0.0, 1.0);
  out.decision = binary_transform(out.predicted_label, target_user);
  return out;
}

double gradient_check(ClassifierKind kind, std::uint64_t seed, const GradientCheckShape& shape) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto random_matrix = [&](Eigen::Index rows, Eigen::Index cols, double scale) {
    return Eigen::MatrixXd(Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return scale * normal(rng); }));
  };

  switch (kind) {
    case ClassifierKind::kLR: {
      const LogisticObjective objective(shape.inputs, shape.outputs);
      const Eigen::VectorXd params = random_matrix(objective.parameter_count(), 1, 0.5);
      const Eigen::MatrixXd x = random_matrix(shape.batch, shape.inputs, 1.0);
      const Eigen::MatrixXd y = Eigen::MatrixXd::NullaryExpr(shape.batch, shape.outputs,
                                                             [&] { return coin(rng) ? 1.0 : 0.0; });
      return max_relative_gradient_error(objective, params, x, y);
    }
    case ClassifierKind::kMLP: {
      const MlpObjective objective(shape.inputs, {shape.hidden}, shape.outputs);
      const Eigen::VectorXd params = random_matrix(objective.parameter_count(), 1, 0.5);
      const Eigen::MatrixXd x = random_matrix(shape.batch, shape.inputs, 1.0);
      Eigen::MatrixXd y = Eigen::MatrixXd::Zero(shape.batch, shape.outputs);
      std::uniform_int_distribution<Eigen::Index> cls(0, shape.outputs - 1);
      for (Eigen::Index i = 0; i < shape.batch; ++i) y(i, cls(rng)) = 1.0;
      return max_relative_gradient_error(objective, params, x, y);
    }
    case ClassifierKind::kLSTM: {
      const LstmObjective objective(shape.inputs, shape.hidden, shape.steps);
      const Eigen::VectorXd params = random_matrix(objective.parameter_count(), 1, 0.5);
      const Eigen::MatrixXd x = random_matrix(shape.batch, shape.inputs * shape.steps, 1.0);
      const Eigen::MatrixXd y =
          Eigen::MatrixXd::NullaryExpr(shape.batch, 1, [&] { return coin(rng) ? 1.0 : 0.0; });
      return max_relative_gradient_error(objective, params, x, y);
    }
    default:
      throw ConfigError(fmt::format("{} is not gradient-trained", kind_name(kind)));
  }
}

}  // namespace biomauth
