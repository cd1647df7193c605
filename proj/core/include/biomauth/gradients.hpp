#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace biomauth {

struct LossGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// A differentiable training objective over a flat parameter vector.
/// Rows of `inputs` and `targets` are samples; the loss is the batch mean.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Eigen::Index parameter_count() const = 0;
  virtual Eigen::Index input_dimension() const = 0;
  virtual Eigen::Index output_dimension() const = 0;

  virtual LossGradient evaluate(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs,
                                const Eigen::MatrixXd& targets) const = 0;

  /// Output-layer pre-activations, one row per input row.
  virtual Eigen::MatrixXd logits(const Eigen::VectorXd& params,
                                 const Eigen::MatrixXd& inputs) const = 0;
};

/// Independent sigmoid outputs with summed binary cross-entropy (one-vs-rest
/// logistic regression when targets are one-hot). Layout: W (outputs x inputs,
/// column-major), then the bias vector.
class LogisticObjective final : public Objective {
 public:
  LogisticObjective(Eigen::Index inputs, Eigen::Index outputs);

  Eigen::Index parameter_count() const override { return outputs_ * (inputs_ + 1); }
  Eigen::Index input_dimension() const override { return inputs_; }
  Eigen::Index output_dimension() const override { return outputs_; }
  LossGradient evaluate(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets) const override;
  Eigen::MatrixXd logits(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs) const override;

 private:
  Eigen::Index inputs_;
  Eigen::Index outputs_;
};

/// Fully connected ReLU layers with a softmax cross-entropy head. Layout per
/// layer: W (fan_out x fan_in, column-major), then bias.
class MlpObjective final : public Objective {
 public:
  MlpObjective(Eigen::Index inputs, std::vector<Eigen::Index> hidden, Eigen::Index outputs);

  Eigen::Index parameter_count() const override;
  Eigen::Index input_dimension() const override { return sizes_.front(); }
  Eigen::Index output_dimension() const override { return sizes_.back(); }
  LossGradient evaluate(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets) const override;
  Eigen::MatrixXd logits(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs) const override;

  const std::vector<Eigen::Index>& layer_sizes() const { return sizes_; }

 private:
  std::vector<Eigen::Index> sizes_;
};

/// One LSTM cell unrolled over `steps` time steps (zero initial state), then
/// a dense sigmoid head trained with binary cross-entropy. Each input row
/// holds `steps` consecutive frames of `inputs` values. Gate order in the
/// stacked weights is input, forget, candidate, output. Layout: W (4H x d),
/// U (4H x H), b (4H), head weights (H), head bias.
class LstmObjective final : public Objective {
 public:
  LstmObjective(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index steps = 1);

  Eigen::Index parameter_count() const override;
  Eigen::Index input_dimension() const override { return inputs_ * steps_; }
  Eigen::Index output_dimension() const override { return 1; }
  LossGradient evaluate(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets) const override;
  Eigen::MatrixXd logits(const Eigen::VectorXd& params, const Eigen::MatrixXd& inputs) const override;

  Eigen::Index hidden() const { return hidden_; }
  Eigen::Index steps() const { return steps_; }

 private:
  Eigen::Index inputs_;
  Eigen::Index hidden_;
  Eigen::Index steps_;
};

/// Maximum over parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-6),
/// with numeric gradients from central differences.
double max_relative_gradient_error(const Objective& objective, const Eigen::VectorXd& params,
                                   const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                                   double step = 1e-5);

struct AdamOptions {
  double learning_rate = 0.01;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
};

/// Mini-batch Adam over seeded per-epoch shuffles. Throws TrainingError
/// naming the epoch if the loss becomes non-finite.
Eigen::VectorXd train_adam(const Objective& objective, Eigen::VectorXd params,
                           const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                           const AdamOptions& options);

double sigmoid(double z);
double softplus(double z);

}  // namespace biomauth
