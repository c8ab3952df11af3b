#include "cuspmdn/mdn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cuspmdn {

std::string_view to_string(Activation a) noexcept {
  return a == Activation::ReLU ? "relu" : "tanh";
}

std::string_view to_string(Optimizer o) noexcept {
  switch (o) {
    case Optimizer::SGD: return "sgd";
    case Optimizer::RMSProp: return "rmsprop";
    case Optimizer::Adam: return "adam";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "tanh") return Activation::Tanh;
  throw std::invalid_argument("unknown activation '" + std::string(name) + "'");
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::SGD;
  if (name == "rmsprop") return Optimizer::RMSProp;
  if (name == "adam") return Optimizer::Adam;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void NetworkConfig::validate() const {
  if (hidden_sizes.empty()) throw std::invalid_argument("NetworkConfig: need at least one hidden layer");
  if (std::find(hidden_sizes.begin(), hidden_sizes.end(), 0u) != hidden_sizes.end()) {
    throw std::invalid_argument("NetworkConfig: hidden layer widths must be positive");
  }
  if (k < 1) throw std::invalid_argument("NetworkConfig: k must be at least 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) {
    throw std::invalid_argument("NetworkConfig: dropout_rate must lie in [0, 1)");
  }
  if (!(sd_floor > 0.0) || !std::isfinite(sd_floor)) {
    throw std::invalid_argument("NetworkConfig: sd_floor must be positive");
  }
}

void TrainConfig::validate() const {
  if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("TrainConfig: batch_size must be at least 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be positive");
  }
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet z = *this;
  z.visit([](std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
  return z;
}

std::size_t ParameterSet::parameter_count() const {
  std::size_t n = 0;
  visit([&n](std::span<const double> s) { n += s.size(); });
  return n;
}

bool ParameterSet::all_finite() const {
  bool ok = true;
  visit([&ok](std::span<const double> s) {
    ok = ok && std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); });
  });
  return ok;
}

Standardizer Standardizer::fit(const FeatureMatrix& features) {
  Standardizer s;
  const auto n = static_cast<double>(features.rows());
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    const double mean = features.col(j).sum() / n;
    const double var = (features.col(j).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    s.mean.push_back(mean);
    s.sd.push_back(sd > 0.0 ? sd : 1.0);
  }
  return s;
}

Standardizer Standardizer::identity(std::size_t dim) {
  return {std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0)};
}

namespace {

DenseLayer make_layer(std::size_t out, std::size_t in) {
  return {Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in)),
          Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out))};
}

void fill_uniform(Eigen::MatrixXd& w, double limit, Engine& rng) {
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
}

void check_layer(const DenseLayer& l, std::size_t out, std::size_t in, const std::string& name) {
  if (static_cast<std::size_t>(l.weights.rows()) != out ||
      static_cast<std::size_t>(l.weights.cols()) != in ||
      static_cast<std::size_t>(l.bias.size()) != out) {
    throw std::invalid_argument("layer '" + name + "': expected " + std::to_string(out) + "x" +
                                std::to_string(in) + " weights and " + std::to_string(out) +
                                " biases");
  }
}

}  // namespace

MdnModel MdnModel::initialize(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  if (config.input_dim < 1) throw std::invalid_argument("MdnModel: input_dim must be positive");
  MdnModel m;
  m.config = config;
  m.standardizer = Standardizer::identity(config.input_dim);
  Engine rng(derive_seed(seed, seed_tag::kInit));
  const double gain = config.activation == Activation::ReLU ? 6.0 : 3.0;
  std::size_t in = config.input_dim;
  for (std::size_t width : config.hidden_sizes) {
    DenseLayer l = make_layer(width, in);
    fill_uniform(l.weights, std::sqrt(gain / static_cast<double>(in)), rng);
    m.params.hidden.push_back(std::move(l));
    in = width;
  }
  const double head_limit = std::sqrt(3.0 / static_cast<double>(in));
  for (DenseLayer* head : {&m.params.mean_head, &m.params.scale_head, &m.params.weight_head}) {
    *head = make_layer(config.k, in);
    fill_uniform(head->weights, head_limit, rng);
  }
  return m;
}

void MdnModel::validate() const {
  config.validate();
  if (standardizer.mean.size() != config.input_dim || standardizer.sd.size() != config.input_dim) {
    throw std::invalid_argument("standardizer: expected " + std::to_string(config.input_dim) +
                                " features");
  }
  if (params.hidden.size() != config.hidden_sizes.size()) {
    throw std::invalid_argument("expected " + std::to_string(config.hidden_sizes.size()) +
                                " hidden layers, found " + std::to_string(params.hidden.size()));
  }
  std::size_t in = config.input_dim;
  for (std::size_t i = 0; i < params.hidden.size(); ++i) {
    check_layer(params.hidden[i], config.hidden_sizes[i], in, "hidden" + std::to_string(i));
    in = config.hidden_sizes[i];
  }
  check_layer(params.mean_head, config.k, in, "mean_head");
  check_layer(params.scale_head, config.k, in, "scale_head");
  check_layer(params.weight_head, config.k, in, "weight_head");
  if (!params.all_finite()) throw std::invalid_argument("model parameters must be finite");
  for (double s : standardizer.sd) {
    if (!(s > 0.0) || !std::isfinite(s)) throw std::invalid_argument("standardizer: sd must be positive");
  }
}

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

struct Pass {
  std::vector<Eigen::MatrixXd> pre;   // hidden pre-activations
  std::vector<Eigen::MatrixXd> act;   // act[0] is the standardized input, act[l+1] feeds layer l+1
  std::vector<Eigen::MatrixXd> mask;  // inverted-dropout multipliers, empty when off
  Eigen::MatrixXd mu;
  Eigen::MatrixXd scale_exp;  // exp(raw scale)
  Eigen::MatrixXd sd;
  Eigen::MatrixXd log_weights;
  Eigen::MatrixXd weights;
};

Eigen::MatrixXd standardize(const MdnModel& m, const FeatureMatrix& x) {
  if (static_cast<std::size_t>(x.cols()) != m.config.input_dim) {
    throw std::invalid_argument("expected " + std::to_string(m.config.input_dim) +
                                " input features, got " + std::to_string(x.cols()));
  }
  const auto d = static_cast<Eigen::Index>(m.config.input_dim);
  const Eigen::Map<const Eigen::VectorXd> mean(m.standardizer.mean.data(), d);
  const Eigen::Map<const Eigen::VectorXd> sd(m.standardizer.sd.data(), d);
  Eigen::MatrixXd z = x.transpose();
  z.colwise() -= mean;
  z.array().colwise() /= sd.array();
  return z;
}

Pass run_forward(const MdnModel& m, Eigen::MatrixXd input, Engine* dropout_rng) {
  const auto& params = m.params;
  const double rate = m.config.dropout_rate;
  const bool dropout = dropout_rng != nullptr && rate > 0.0;
  Pass pass;
  pass.act.push_back(std::move(input));
  for (const DenseLayer& layer : params.hidden) {
    Eigen::MatrixXd z = layer.weights * pass.act.back();
    z.colwise() += layer.bias;
    Eigen::MatrixXd a = m.config.activation == Activation::ReLU
                            ? Eigen::MatrixXd(z.cwiseMax(0.0))
                            : Eigen::MatrixXd(z.array().tanh().matrix());
    if (dropout) {
      std::bernoulli_distribution keep(1.0 - rate);
      const double scale = 1.0 / (1.0 - rate);
      Eigen::MatrixXd mask(a.rows(), a.cols());
      for (Eigen::Index i = 0; i < mask.size(); ++i) {
        mask.data()[i] = keep(*dropout_rng) ? scale : 0.0;
      }
      a = a.cwiseProduct(mask);
      pass.mask.push_back(std::move(mask));
    }
    pass.pre.push_back(std::move(z));
    pass.act.push_back(std::move(a));
  }
  const Eigen::MatrixXd& h = pass.act.back();
  pass.mu = params.mean_head.weights * h;
  pass.mu.colwise() += params.mean_head.bias;
  Eigen::MatrixXd raw = params.scale_head.weights * h;
  raw.colwise() += params.scale_head.bias;
  pass.scale_exp = raw.array().exp().matrix();
  pass.sd = (pass.scale_exp.array() + m.config.sd_floor).matrix();
  Eigen::MatrixXd logits = params.weight_head.weights * h;
  logits.colwise() += params.weight_head.bias;
  pass.log_weights.resize(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double top = logits.col(j).maxCoeff();
    const double lse = top + std::log((logits.col(j).array() - top).exp().sum());
    pass.log_weights.col(j) = logits.col(j).array() - lse;
  }
  pass.weights = pass.log_weights.array().exp().matrix();
  return pass;
}

MixturePrediction column_prediction(const Pass& pass, Eigen::Index j) {
  MixturePrediction p;
  const auto k = pass.mu.rows();
  p.means.resize(static_cast<std::size_t>(k));
  p.sds.resize(static_cast<std::size_t>(k));
  p.weights.resize(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    p.means[static_cast<std::size_t>(i)] = pass.mu(i, j);
    p.sds[static_cast<std::size_t>(i)] = pass.sd(i, j);
    p.weights[static_cast<std::size_t>(i)] = pass.weights(i, j);
  }
  return p;
}

}  // namespace

MixturePrediction forward(const MdnModel& m, std::span<const double> x, bool training,
                          Engine* dropout_rng) {
  if (x.size() != m.config.input_dim) {
    throw std::invalid_argument("forward: expected " + std::to_string(m.config.input_dim) +
                                " features, got " + std::to_string(x.size()));
  }
  const FeatureMatrix row =
      Eigen::Map<const FeatureMatrix>(x.data(), 1, static_cast<Eigen::Index>(x.size()));
  const Pass pass = run_forward(m, standardize(m, row), training ? dropout_rng : nullptr);
  return column_prediction(pass, 0);
}

MixturePrediction predict(const MdnModel& m, std::span<const double> x) {
  return forward(m, x, false, nullptr);
}

std::vector<MixturePrediction> predict_batch(const MdnModel& m, const FeatureMatrix& x) {
  const Pass pass = run_forward(m, standardize(m, x), nullptr);
  std::vector<MixturePrediction> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index j = 0; j < x.rows(); ++j) out.push_back(column_prediction(pass, j));
  return out;
}

double point_nll(const MixturePrediction& pred, double y) {
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> lc(pred.k());
  for (std::size_t i = 0; i < pred.k(); ++i) {
    const double z = (y - pred.means[i]) / pred.sds[i];
    lc[i] = std::log(pred.weights[i]) - std::log(pred.sds[i]) - kHalfLog2Pi - 0.5 * z * z;
    top = std::max(top, lc[i]);
  }
  double sum = 0.0;
  for (double v : lc) sum += std::exp(v - top);
  return -(top + std::log(sum));
}

double nll_loss(std::span<const MixturePrediction> preds, std::span<const double> y) {
  if (preds.size() != y.size()) throw std::invalid_argument("nll_loss: batch and y lengths differ");
  if (preds.empty()) throw std::invalid_argument("nll_loss: empty batch");
  double total = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) total += point_nll(preds[i], y[i]);
  return total / static_cast<double>(preds.size());
}

double loss_and_gradients(const MdnModel& m, const FeatureMatrix& x, std::span<const double> y,
                          Engine* dropout_rng, ParameterSet* grad) {
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw std::invalid_argument("loss_and_gradients: feature and response row counts differ");
  }
  if (y.empty()) throw std::invalid_argument("loss_and_gradients: empty batch");
  const Pass pass = run_forward(m, standardize(m, x), dropout_rng);
  const auto k = pass.mu.rows();
  const auto batch = pass.mu.cols();
  const double inv_b = 1.0 / static_cast<double>(batch);

  Eigen::MatrixXd d_mu(k, batch), d_raw(k, batch), d_logit(k, batch);
  Eigen::VectorXd lc(k);
  double total = 0.0;
  for (Eigen::Index j = 0; j < batch; ++j) {
    const double target = y[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < k; ++i) {
      const double z = (target - pass.mu(i, j)) / pass.sd(i, j);
      lc(i) = pass.log_weights(i, j) - std::log(pass.sd(i, j)) - kHalfLog2Pi - 0.5 * z * z;
    }
    const double top = lc.maxCoeff();
    const double lse = top + std::log((lc.array() - top).exp().sum());
    total -= lse;
    if (!grad) continue;
    for (Eigen::Index i = 0; i < k; ++i) {
      const double resp = std::exp(lc(i) - lse);
      const double sd = pass.sd(i, j);
      const double z = (target - pass.mu(i, j)) / sd;
      d_mu(i, j) = -resp * z / sd * inv_b;
      d_raw(i, j) = resp * (1.0 - z * z) / sd * pass.scale_exp(i, j) * inv_b;
      d_logit(i, j) = (pass.weights(i, j) - resp) * inv_b;
    }
  }
  const double loss = total * inv_b;
  if (!grad) return loss;

  const auto& params = m.params;
  if (grad->hidden.size() != params.hidden.size()) *grad = params.zeros_like();
  const Eigen::MatrixXd& h = pass.act.back();
  grad->mean_head.weights.noalias() = d_mu * h.transpose();
  grad->mean_head.bias = d_mu.rowwise().sum();
  grad->scale_head.weights.noalias() = d_raw * h.transpose();
  grad->scale_head.bias = d_raw.rowwise().sum();
  grad->weight_head.weights.noalias() = d_logit * h.transpose();
  grad->weight_head.bias = d_logit.rowwise().sum();

  Eigen::MatrixXd d_act = params.mean_head.weights.transpose() * d_mu +
                          params.scale_head.weights.transpose() * d_raw +
                          params.weight_head.weights.transpose() * d_logit;
  for (std::size_t l = params.hidden.size(); l-- > 0;) {
    if (!pass.mask.empty()) d_act = d_act.cwiseProduct(pass.mask[l]);
    const Eigen::MatrixXd& z = pass.pre[l];
    Eigen::MatrixXd d_pre;
    if (m.config.activation == Activation::ReLU) {
      d_pre = (z.array() > 0.0).select(d_act, 0.0);
    } else {
      d_pre = d_act.array() * (1.0 - z.array().tanh().square());
    }
    grad->hidden[l].weights.noalias() = d_pre * pass.act[l].transpose();
    grad->hidden[l].bias = d_pre.rowwise().sum();
    if (l > 0) d_act = params.hidden[l].weights.transpose() * d_pre;
  }
  return loss;
}

ParameterSet gradients(const MdnModel& m, const FeatureMatrix& x, std::span<const double> y) {
  ParameterSet grad = m.params.zeros_like();
  loss_and_gradients(m, x, y, nullptr, &grad);
  return grad;
}

}  // namespace cuspmdn
