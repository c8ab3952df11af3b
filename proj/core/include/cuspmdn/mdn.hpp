#pragma once

// Feedforward mixture density network.
//
// Inputs are standardized with statistics fitted on the training features,
// passed through dense hidden layers (ReLU or tanh, inverted dropout while
// training) and three linear heads of width k:
//
//   means    mu_i    unconstrained
//   scales   sigma_i = exp(raw_i) + sd_floor
//   weights  pi_i    = softmax(logits)_i
//
// The loss is the mean negative log-likelihood of the Gaussian mixture,
// evaluated with log-sum-exp.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cuspmdn/datagen.hpp"
#include "cuspmdn/rng.hpp"

namespace cuspmdn {

enum class Activation { ReLU, Tanh };
enum class Optimizer { SGD, RMSProp, Adam };

std::string_view to_string(Activation a) noexcept;
std::string_view to_string(Optimizer o) noexcept;
Activation parse_activation(std::string_view name);
Optimizer parse_optimizer(std::string_view name);

struct NetworkConfig {
  std::size_t input_dim = 0;  // 0 lets train() take it from the data
  std::vector<std::size_t> hidden_sizes{32, 32, 32};
  Activation activation = Activation::ReLU;
  double dropout_rate = 0.1;
  std::size_t k = 1;
  double sd_floor = 1e-3;

  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 500;
  std::size_t batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::Adam;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd bias;     // out
};

/// Every trainable tensor of the network. Also used for gradients and
/// optimizer moments, which share the shape.
struct ParameterSet {
  std::vector<DenseLayer> hidden;
  DenseLayer mean_head;
  DenseLayer scale_head;
  DenseLayer weight_head;

  /// Calls f(std::span<double>) (or std::span<const double>) once per weight
  /// matrix and bias vector, in a fixed order: hidden layers first, then the
  /// mean, scale and weight heads.
  template <class F>
  void visit(F&& f) { visit_impl(*this, f); }
  template <class F>
  void visit(F&& f) const { visit_impl(*this, f); }

  ParameterSet zeros_like() const;
  std::size_t parameter_count() const;
  bool all_finite() const;

 private:
  template <class Self, class F>
  static void visit_impl(Self& self, F& f) {
    auto layer = [&f](auto& l) {
      f(std::span(l.weights.data(), static_cast<std::size_t>(l.weights.size())));
      f(std::span(l.bias.data(), static_cast<std::size_t>(l.bias.size())));
    };
    for (auto& l : self.hidden) layer(l);
    layer(self.mean_head);
    layer(self.scale_head);
    layer(self.weight_head);
  }
};

/// Per-feature affine map to zero mean and unit (population) variance.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> sd;

  /// Constant features get sd = 1.
  static Standardizer fit(const FeatureMatrix& features);
  static Standardizer identity(std::size_t dim);
  std::size_t dim() const noexcept { return mean.size(); }
};

struct MdnModel {
  NetworkConfig config;
  Standardizer standardizer;
  ParameterSet params;

  /// Random weights (uniform, limit sqrt(6/fan_in) for ReLU layers and
  /// sqrt(3/fan_in) otherwise), zero biases, identity standardizer.
  static MdnModel initialize(const NetworkConfig& config, std::uint64_t seed);

  /// Throws std::invalid_argument when dimensions do not chain or a value is
  /// not finite.
  void validate() const;
};

struct MixturePrediction {
  std::vector<double> means;
  std::vector<double> sds;
  std::vector<double> weights;

  std::size_t k() const noexcept { return means.size(); }
  friend bool operator==(const MixturePrediction&, const MixturePrediction&) = default;
};

/// One input row (raw feature units). `dropout_rng` is only read when
/// `training` is set and the dropout rate is positive.
MixturePrediction forward(const MdnModel& m, std::span<const double> x, bool training,
                          Engine* dropout_rng = nullptr);

/// forward() with training off.
MixturePrediction predict(const MdnModel& m, std::span<const double> x);
std::vector<MixturePrediction> predict_batch(const MdnModel& m, const FeatureMatrix& x);

/// -log sum_i pi_i * phi((y - mu_i)/sigma_i)/sigma_i for one point.
double point_nll(const MixturePrediction& pred, double y);
/// Mean of point_nll over the batch.
double nll_loss(std::span<const MixturePrediction> preds, std::span<const double> y);

/// Mean NLL of a batch of raw feature rows and, when `grad` is given, its
/// analytic gradient with respect to every parameter. Dropout masks are drawn
/// from `dropout_rng` when it is non-null.
double loss_and_gradients(const MdnModel& m, const FeatureMatrix& x, std::span<const double> y,
                          Engine* dropout_rng, ParameterSet* grad);

/// Gradient of the mean NLL with dropout disabled.
ParameterSet gradients(const MdnModel& m, const FeatureMatrix& x, std::span<const double> y);

class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, std::size_t batch)
      : std::runtime_error(what), epoch_(epoch), batch_(batch) {}
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

struct TrainingHistory {
  double initial_loss = 0.0;  // full training set, dropout off, before the first step
  double final_loss = 0.0;    // same, after the last epoch
  std::vector<double> epoch_loss;  // mean minibatch loss per epoch (dropout on)
};

/// Fits the standardizer on `data.features`, initializes the heads from the
/// response (mean biases at evenly spaced quantiles, scale biases at the
/// response spread) and runs minibatch optimization of the NLL.
/// Deterministic in (data, configs). Throws TrainingError on a non-finite
/// loss or parameter.
MdnModel train(const Dataset& data, const NetworkConfig& nc, const TrainConfig& tc,
               TrainingHistory* history = nullptr);

/// First-order optimizers over a ParameterSet.
class OptimizerState {
 public:
  OptimizerState(Optimizer kind, double learning_rate, const ParameterSet& shape);
  void step(ParameterSet& params, const ParameterSet& grad);

  static constexpr double kRmsDecay = 0.9;
  static constexpr double kAdamBeta1 = 0.9;
  static constexpr double kAdamBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

 private:
  Optimizer kind_;
  double lr_;
  ParameterSet first_;
  ParameterSet second_;
  std::size_t steps_ = 0;
};

}  // namespace cuspmdn
