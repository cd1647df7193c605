#include "biomauth/gradients.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/format.h>

#include "biomauth/errors.hpp"

namespace biomauth {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMatrixMap = Eigen::Map<const MatrixXd>;
using MatrixMap = Eigen::Map<MatrixXd>;
using ConstVectorMap = Eigen::Map<const VectorXd>;
using VectorMap = Eigen::Map<VectorXd>;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

namespace {

void require_shapes(const Objective& objective, const VectorXd& params, const MatrixXd& inputs,
                    const MatrixXd* targets) {
  if (params.size() != objective.parameter_count()) {
    throw DimensionError(fmt::format("expected {} parameters, got {}", objective.parameter_count(),
                                     params.size()));
  }
  if (inputs.cols() != objective.input_dimension()) {
    throw DimensionError(fmt::format("expected {} input columns, got {}",
                                     objective.input_dimension(), inputs.cols()));
  }
  if (targets != nullptr &&
      (targets->rows() != inputs.rows() || targets->cols() != objective.output_dimension())) {
    throw DimensionError(fmt::format("targets must be {}x{}, got {}x{}", inputs.rows(),
                                     objective.output_dimension(), targets->rows(), targets->cols()));
  }
}

MatrixXd sigmoid(const MatrixXd& z) { return z.unaryExpr([](double v) { return biomauth::sigmoid(v); }); }

}  // namespace

// ---------------------------------------------------------------------------

LogisticObjective::LogisticObjective(Index inputs, Index outputs) : inputs_(inputs), outputs_(outputs) {
  if (inputs < 1 || outputs < 1) throw DimensionError("logistic objective needs positive sizes");
}

MatrixXd LogisticObjective::logits(const VectorXd& params, const MatrixXd& inputs) const {
  require_shapes(*this, params, inputs, nullptr);
  const ConstMatrixMap w(params.data(), outputs_, inputs_);
  const ConstVectorMap b(params.data() + outputs_ * inputs_, outputs_);
  MatrixXd z = inputs * w.transpose();
  z.rowwise() += b.transpose();
  return z;
}

LossGradient LogisticObjective::evaluate(const VectorXd& params, const MatrixXd& inputs,
                                         const MatrixXd& targets) const {
  require_shapes(*this, params, inputs, &targets);
  const MatrixXd z = logits(params, inputs);
  const double n = static_cast<double>(inputs.rows());

  LossGradient out;
  out.loss = (z.unaryExpr([](double v) { return softplus(v); }) - targets.cwiseProduct(z)).sum() / n;

  const MatrixXd dz = (sigmoid(z) - targets) / n;
  out.gradient.resize(parameter_count());
  MatrixMap(out.gradient.data(), outputs_, inputs_) = dz.transpose() * inputs;
  VectorMap(out.gradient.data() + outputs_ * inputs_, outputs_) = dz.colwise().sum().transpose();
  return out;
}

// ---------------------------------------------------------------------------

MlpObjective::MlpObjective(Index inputs, std::vector<Index> hidden, Index outputs) {
  sizes_.push_back(inputs);
  sizes_.insert(sizes_.end(), hidden.begin(), hidden.end());
  sizes_.push_back(outputs);
  if (std::any_of(sizes_.begin(), sizes_.end(), [](Index s) { return s < 1; })) {
    throw DimensionError("MLP layer sizes must be positive");
  }
}

Index MlpObjective::parameter_count() const {
  Index count = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) count += sizes_[l] * (sizes_[l - 1] + 1);
  return count;
}

MatrixXd MlpObjective::logits(const VectorXd& params, const MatrixXd& inputs) const {
  require_shapes(*this, params, inputs, nullptr);
  MatrixXd a = inputs;
  Index offset = 0;
  for (std::size_t l = 1; l < sizes_.size(); ++l) {
    const ConstMatrixMap w(params.data() + offset, sizes_[l], sizes_[l - 1]);
    offset += sizes_[l] * sizes_[l - 1];
    const ConstVectorMap b(params.data() + offset, sizes_[l]);
    offset += sizes_[l];
    MatrixXd z = a * w.transpose();
    z.rowwise() += b.transpose();
    a = l + 1 < sizes_.size() ? MatrixXd(z.cwiseMax(0.0)) : z;
  }
  return a;
}

LossGradient MlpObjective::evaluate(const VectorXd& params, const MatrixXd& inputs,
                                    const MatrixXd& targets) const {
  require_shapes(*this, params, inputs, &targets);
  const std::size_t layers = sizes_.size() - 1;
  const double n = static_cast<double>(inputs.rows());

  std::vector<Index> offsets(layers);
  Index offset = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    offsets[l] = offset;
    offset += sizes_[l + 1] * (sizes_[l] + 1);
  }
  const auto weight = [&](std::size_t l) {
    return ConstMatrixMap(params.data() + offsets[l], sizes_[l + 1], sizes_[l]);
  };
  const auto bias = [&](std::size_t l) {
    return ConstVectorMap(params.data() + offsets[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]);
  };

  // activations[l] feeds layer l; pre[l] is that layer's pre-activation.
  std::vector<MatrixXd> activations(layers + 1);
  std::vector<MatrixXd> pre(layers);
  activations[0] = inputs;
  for (std::size_t l = 0; l < layers; ++l) {
    pre[l] = activations[l] * weight(l).transpose();
    pre[l].rowwise() += bias(l).transpose();
    if (l + 1 < layers) activations[l + 1] = pre[l].cwiseMax(0.0);
  }

  const MatrixXd& z = pre.back();
  const Eigen::VectorXd row_max = z.rowwise().maxCoeff();
  const MatrixXd shifted = z.colwise() - row_max;
  const Eigen::VectorXd lse = row_max + shifted.array().exp().rowwise().sum().log().matrix();
  const MatrixXd probs = (z.colwise() - lse).array().exp().matrix();
  const Eigen::VectorXd target_mass = targets.rowwise().sum();

  LossGradient out;
  out.loss = (target_mass.cwiseProduct(lse).sum() - targets.cwiseProduct(z).sum()) / n;
  out.gradient.resize(parameter_count());

  MatrixXd dz = (probs.array().colwise() * target_mass.array()).matrix() - targets;
  dz /= n;
  for (std::size_t l = layers; l-- > 0;) {
    MatrixMap(out.gradient.data() + offsets[l], sizes_[l + 1], sizes_[l]) = dz.transpose() * activations[l];
    VectorMap(out.gradient.data() + offsets[l] + sizes_[l + 1] * sizes_[l], sizes_[l + 1]) =
        dz.colwise().sum().transpose();
    if (l > 0) {
      MatrixXd da = dz * weight(l);
      dz = (pre[l - 1].array() > 0.0).select(da, 0.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

LstmObjective::LstmObjective(Index inputs, Index hidden, Index steps)
    : inputs_(inputs), hidden_(hidden), steps_(steps) {
  if (inputs < 1 || hidden < 1 || steps < 1) throw DimensionError("LSTM sizes must be positive");
}

Index LstmObjective::parameter_count() const {
  const Index g = 4 * hidden_;
  return g * inputs_ + g * hidden_ + g + hidden_ + 1;
}

namespace {

struct LstmView {
  ConstMatrixMap w;
  ConstMatrixMap u;
  ConstVectorMap b;
  ConstVectorMap head;
  double head_bias;
};

LstmView view_lstm(const VectorXd& params, Index d, Index h) {
  const Index g = 4 * h;
  const double* p = params.data();
  return {ConstMatrixMap(p, g, d), ConstMatrixMap(p + g * d, g, h), ConstVectorMap(p + g * d + g * h, g),
          ConstVectorMap(p + g * d + g * h + g, h), p[g * d + g * h + g + h]};
}

struct LstmStep {
  MatrixXd input_gate, forget_gate, candidate, output_gate, cell, cell_tanh, hidden;
};

std::vector<LstmStep> run_lstm(const LstmView& v, const MatrixXd& inputs, Index d, Index h, Index steps) {
  const Index n = inputs.rows();
  std::vector<LstmStep> trace;
  trace.reserve(static_cast<std::size_t>(steps));
  MatrixXd hidden = MatrixXd::Zero(n, h);
  MatrixXd cell = MatrixXd::Zero(n, h);
  for (Index t = 0; t < steps; ++t) {
    MatrixXd a = inputs.middleCols(t * d, d) * v.w.transpose() + hidden * v.u.transpose();
    a.rowwise() += v.b.transpose();
    LstmStep s;
    s.input_gate = sigmoid(MatrixXd(a.middleCols(0, h)));
    s.forget_gate = sigmoid(MatrixXd(a.middleCols(h, h)));
    s.candidate = a.middleCols(2 * h, h).array().tanh();
    s.output_gate = sigmoid(MatrixXd(a.middleCols(3 * h, h)));
    s.cell = s.forget_gate.cwiseProduct(cell) + s.input_gate.cwiseProduct(s.candidate);
    s.cell_tanh = s.cell.array().tanh();
    s.hidden = s.output_gate.cwiseProduct(s.cell_tanh);
    hidden = s.hidden;
    cell = s.cell;
    trace.push_back(std::move(s));
  }
  return trace;
}

}  // namespace

MatrixXd LstmObjective::logits(const VectorXd& params, const MatrixXd& inputs) const {
  require_shapes(*this, params, inputs, nullptr);
  const auto v = view_lstm(params, inputs_, hidden_);
  const auto trace = run_lstm(v, inputs, inputs_, hidden_, steps_);
  MatrixXd z = trace.back().hidden * v.head;
  z.array() += v.head_bias;
  return z;
}

LossGradient LstmObjective::evaluate(const VectorXd& params, const MatrixXd& inputs,
                                     const MatrixXd& targets) const {
  require_shapes(*this, params, inputs, &targets);
  const Index d = inputs_;
  const Index h = hidden_;
  const Index g = 4 * h;
  const Index n = inputs.rows();
  const auto v = view_lstm(params, d, h);
  const auto trace = run_lstm(v, inputs, d, h, steps_);

  VectorXd z = trace.back().hidden * v.head;
  z.array() += v.head_bias;
  const VectorXd y = targets.col(0);

  LossGradient out;
  out.loss = (z.unaryExpr([](double s) { return softplus(s); }) - y.cwiseProduct(z)).sum() /
             static_cast<double>(n);
  out.gradient = VectorXd::Zero(parameter_count());
  double* grad = out.gradient.data();
  MatrixMap dw(grad, g, d);
  MatrixMap du(grad + g * d, g, h);
  VectorMap db(grad + g * d + g * h, g);
  VectorMap dhead(grad + g * d + g * h + g, h);
  double& dhead_bias = grad[g * d + g * h + g + h];

  const VectorXd dz = (z.unaryExpr([](double s) { return sigmoid(s); }) - y) / static_cast<double>(n);
  dhead = trace.back().hidden.transpose() * dz;
  dhead_bias = dz.sum();

  MatrixXd dhidden = dz * v.head.transpose();
  MatrixXd dcell = MatrixXd::Zero(n, h);
  const MatrixXd zeros = MatrixXd::Zero(n, h);
  for (Index t = steps_; t-- > 0;) {
    const auto& s = trace[static_cast<std::size_t>(t)];
    const MatrixXd& prev_cell = t > 0 ? trace[static_cast<std::size_t>(t - 1)].cell : zeros;
    const MatrixXd& prev_hidden = t > 0 ? trace[static_cast<std::size_t>(t - 1)].hidden : zeros;

    dcell += dhidden.cwiseProduct(s.output_gate)
                 .cwiseProduct((1.0 - s.cell_tanh.array().square()).matrix());
    MatrixXd da(n, g);
    da.middleCols(0, h) = dcell.cwiseProduct(s.candidate)
                              .cwiseProduct((s.input_gate.array() * (1.0 - s.input_gate.array())).matrix());
    da.middleCols(h, h) = dcell.cwiseProduct(prev_cell)
                              .cwiseProduct((s.forget_gate.array() * (1.0 - s.forget_gate.array())).matrix());
    da.middleCols(2 * h, h) = dcell.cwiseProduct(s.input_gate)
                                  .cwiseProduct((1.0 - s.candidate.array().square()).matrix());
    da.middleCols(3 * h, h) = dhidden.cwiseProduct(s.cell_tanh)
                                  .cwiseProduct((s.output_gate.array() * (1.0 - s.output_gate.array())).matrix());

    dw += da.transpose() * inputs.middleCols(t * d, d);
    du += da.transpose() * prev_hidden;
    db += da.colwise().sum().transpose();
    dhidden = da * v.u;
    dcell = dcell.cwiseProduct(s.forget_gate);
  }
  return out;
}

// ---------------------------------------------------------------------------

double max_relative_gradient_error(const Objective& objective, const VectorXd& params,
                                   const MatrixXd& inputs, const MatrixXd& targets, double step) {
  const VectorXd analytic = objective.evaluate(params, inputs, targets).gradient;
  VectorXd probe = params;
  double worst = 0.0;
  for (Index i = 0; i < params.size(); ++i) {
    probe[i] = params[i] + step;
    const double up = objective.evaluate(probe, inputs, targets).loss;
    probe[i] = params[i] - step;
    const double down = objective.evaluate(probe, inputs, targets).loss;
    probe[i] = params[i];
    const double numeric = (up - down) / (2.0 * step);
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / scale);
  }
  return worst;
}

VectorXd train_adam(const Objective& objective, VectorXd params, const MatrixXd& inputs,
                    const MatrixXd& targets, const AdamOptions& options) {
  require_shapes(objective, params, inputs, &targets);
  if (inputs.rows() == 0) throw TrainingError("cannot train on zero rows");
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEpsilon = 1e-8;

  std::mt19937_64 rng(options.seed);
  const Index n = inputs.rows();
  const Index batch = std::max<Index>(1, static_cast<Index>(options.batch_size));
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});

  VectorXd m = VectorXd::Zero(params.size());
  VectorXd v = VectorXd::Zero(params.size());
  double beta1_power = 1.0;
  double beta2_power = 1.0;
  MatrixXd batch_inputs;
  MatrixXd batch_targets;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (Index start = 0; start < n; start += batch) {
      const Index rows = std::min(batch, n - start);
      batch_inputs.resize(rows, inputs.cols());
      batch_targets.resize(rows, targets.cols());
      for (Index r = 0; r < rows; ++r) {
        batch_inputs.row(r) = inputs.row(order[static_cast<std::size_t>(start + r)]);
        batch_targets.row(r) = targets.row(order[static_cast<std::size_t>(start + r)]);
      }
      const auto step = objective.evaluate(params, batch_inputs, batch_targets);
      epoch_loss += step.loss * static_cast<double>(rows);

      beta1_power *= kBeta1;
      beta2_power *= kBeta2;
      m = kBeta1 * m + (1.0 - kBeta1) * step.gradient;
      v = kBeta2 * v + (1.0 - kBeta2) * step.gradient.cwiseProduct(step.gradient);
      const double lr = options.learning_rate * std::sqrt(1.0 - beta2_power) / (1.0 - beta1_power);
      params.array() -= lr * m.array() / (v.array().sqrt() + kEpsilon);
    }
    if (!std::isfinite(epoch_loss) || !params.allFinite()) {
      throw TrainingError(fmt::format("non-finite loss at epoch {}", epoch));
    }
  }
  return params;
}

}  // namespace biomauth
