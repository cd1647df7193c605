#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "biomauth/data.hpp"
#include "biomauth/splitting.hpp"

namespace biomauth {

enum class ClassifierKind : std::uint8_t { kRF, kSVM, kKNN, kNB, kLR, kMLP, kLSTM };

inline constexpr std::array<ClassifierKind, 7> kAllKinds = {
    ClassifierKind::kRF, ClassifierKind::kSVM, ClassifierKind::kKNN, ClassifierKind::kNB,
    ClassifierKind::kLR, ClassifierKind::kMLP, ClassifierKind::kLSTM};

/// "RF", "SVM", "KNN", "NB", "LR", "MLP", "LSTM".
std::string_view kind_name(ClassifierKind kind);
/// Case-insensitive inverse of kind_name; "LSTM-RNN" is accepted too.
ClassifierKind parse_kind(std::string_view text);

/// True for the kinds trained on user-id labels and decided by binary_transform.
constexpr bool is_multiclass(ClassifierKind kind) { return kind != ClassifierKind::kLSTM; }

struct HyperParams {
  std::size_t knn_k = 5;
  std::size_t rf_trees = 100;
  std::optional<std::size_t> rf_max_depth;  // unlimited when empty
  double svm_regularization = 1.0;
  std::size_t svm_epochs = 200;
  double lr_threshold = 0.5;
  double learning_rate = 0.01;
  std::vector<Eigen::Index> mlp_hidden = {64};
  Eigen::Index lstm_hidden = 32;
  std::size_t nn_epochs = 100;
  std::size_t batch_size = 32;
  double nb_var_smoothing = 1e-9;
  /// Min-max scale inputs for every kind, not only LSTM.
  bool scale_inputs = false;
  std::uint64_t seed = 0;

  /// Throws ConfigError on a zero count, non-positive rate, or threshold outside (0,1).
  void validate() const;
};

using Label = std::int64_t;

struct RandomForestParams {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int leaf_class = -1;  // index into classes
  };
  std::vector<std::vector<Node>> trees;
};

/// One-vs-rest hyperplanes; column d holds the bias.
struct LinearSvmParams {
  Eigen::MatrixXd weights;  // classes x (d + 1)
};

struct KnnParams {
  Eigen::MatrixXd points;  // rows are stored training vectors
  std::vector<int> class_index;
  std::size_t k = 5;
};

struct NaiveBayesParams {
  Eigen::MatrixXd means;      // classes x d
  Eigen::MatrixXd variances;  // classes x d, already floored
  Eigen::VectorXd log_priors;
};

struct LogisticParams {
  Eigen::VectorXd params;  // LogisticObjective layout
};

struct MlpParams {
  std::vector<Eigen::Index> hidden;
  Eigen::VectorXd params;  // MlpObjective layout
};

struct LstmParams {
  Eigen::Index hidden = 0;
  Eigen::VectorXd params;  // LstmObjective layout, one time step
};

using ModelParams = std::variant<RandomForestParams, LinearSvmParams, KnnParams, NaiveBayesParams,
                                 LogisticParams, MlpParams, LstmParams>;

/// Raw per-class ranking values and their [0,1] confidences, aligned with classes().
struct ClassEvaluation {
  Eigen::VectorXd ranking;
  Eigen::VectorXd scores;
};

/// Immutable result of fit().
class TrainedModel {
 public:
  TrainedModel(ClassifierKind kind, std::vector<Label> classes, std::size_t input_dimension,
               std::optional<ScalerParams> scaler, double decision_threshold, ModelParams params);

  ClassifierKind kind() const { return kind_; }
  std::span<const Label> classes() const { return classes_; }
  std::size_t input_dimension() const { return input_dimension_; }
  const std::optional<ScalerParams>& scaler() const { return scaler_; }
  double decision_threshold() const { return decision_threshold_; }
  const ModelParams& params() const { return params_; }

  /// Applies the stored scaler, then evaluates every class.
  ClassEvaluation evaluate(std::span<const double> x) const;

  /// Highest-ranked class; ties go to the smaller label.
  Label predicted_label(const ClassEvaluation& evaluation) const;

 private:
  ClassifierKind kind_;
  std::vector<Label> classes_;
  std::size_t input_dimension_;
  std::optional<ScalerParams> scaler_;
  double decision_threshold_;
  ModelParams params_;
};

struct ScoredPrediction {
  Label predicted_label = 0;
  double genuine_score = 0.0;
  bool decision = false;
  bool truth = false;  // filled by the caller, who knows the sample's source
};

/// Rows of `features` are samples. Multiclass kinds take user ids as labels;
/// LSTM takes 1 (genuine) / 0 (impostor). Rows are put in a canonical order
/// before any seeded step, so permuting the input never changes the model.
TrainedModel fit(ClassifierKind kind, const Eigen::MatrixXd& features, std::span<const Label> labels,
                 const HyperParams& hyper);

/// For LSTM the decision is genuine_score >= the model threshold and the
/// predicted label is that bit; for the other kinds the decision is
/// binary_transform(predicted_label, target_user).
ScoredPrediction predict(const TrainedModel& model, std::span<const double> x, Label target_user);

constexpr bool binary_transform(Label predicted_label, Label target_user) {
  return predicted_label == target_user;
}

/// Sizes of the random instance built by gradient_check().
struct GradientCheckShape {
  Eigen::Index batch = 4;
  Eigen::Index inputs = 5;
  Eigen::Index outputs = 3;  // LR and MLP
  Eigen::Index hidden = 6;   // MLP hidden units, LSTM cell width
  Eigen::Index steps = 3;    // LSTM sequence length
};

/// Builds a random model and batch for LR, MLP, or LSTM from `seed` and
/// returns the maximum relative error between analytic and central
/// finite-difference gradients (step 1e-5).
double gradient_check(ClassifierKind kind, std::uint64_t seed, const GradientCheckShape& shape = {});

/// Versioned text format; reloading reproduces predictions bit for bit.
void save_model(std::ostream& out, const TrainedModel& model);
TrainedModel load_model(std::istream& in);

namespace detail {
// Per-kind trainers. Inputs are already canonically ordered and scaled;
// `class_index` maps rows to positions in the sorted class list.
RandomForestParams fit_random_forest(const Eigen::MatrixXd& x, std::span<const int> class_index,
                                     std::size_t n_classes, const HyperParams& hyper);
LinearSvmParams fit_linear_svm(const Eigen::MatrixXd& x, std::span<const int> class_index,
                               std::size_t n_classes, const HyperParams& hyper);
KnnParams fit_knn(const Eigen::MatrixXd& x, std::span<const int> class_index, const HyperParams& hyper);
NaiveBayesParams fit_naive_bayes(const Eigen::MatrixXd& x, std::span<const int> class_index,
                                 std::size_t n_classes, const HyperParams& hyper);
LogisticParams fit_logistic(const Eigen::MatrixXd& x, std::span<const int> class_index,
                            std::size_t n_classes, const HyperParams& hyper);
MlpParams fit_mlp(const Eigen::MatrixXd& x, std::span<const int> class_index, std::size_t n_classes,
                  const HyperParams& hyper);
LstmParams fit_lstm(const Eigen::MatrixXd& x, std::span<const int> class_index, const HyperParams& hyper);

ClassEvaluation evaluate(const RandomForestParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
ClassEvaluation evaluate(const LinearSvmParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
ClassEvaluation evaluate(const KnnParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
ClassEvaluation evaluate(const NaiveBayesParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
ClassEvaluation evaluate(const LogisticParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
ClassEvaluation evaluate(const MlpParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
ClassEvaluation evaluate(const LstmParams& p, const Eigen::VectorXd& x, std::size_t n_classes);
}  // namespace detail

}  // namespace biomauth
