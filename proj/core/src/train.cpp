#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "cuspmdn/mdn.hpp"

namespace cuspmdn {

namespace {

double quantile(std::vector<double> sorted, double q) {
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

void initialize_heads(MdnModel& m, std::span<const double> y) {
  const std::vector<double> values(y.begin(), y.end());
  const auto k = m.config.k;
  for (std::size_t i = 0; i < k; ++i) {
    const double q = (static_cast<double>(i) + 0.5) / static_cast<double>(k);
    m.params.mean_head.bias(static_cast<Eigen::Index>(i)) = quantile(values, q);
  }
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) /
                      static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size()));
  m.params.scale_head.bias.setConstant(std::log(std::max(sd - m.config.sd_floor, 1e-6)));
}

}  // namespace

MdnModel train(const Dataset& data, const NetworkConfig& nc, const TrainConfig& tc,
               TrainingHistory* history) {
  tc.validate();
  data.validate();
  if (data.rows() == 0) throw std::invalid_argument("train: dataset is empty");
  NetworkConfig config = nc;
  if (config.input_dim == 0) config.input_dim = data.cols();
  if (config.input_dim != data.cols()) {
    throw std::invalid_argument("train: network expects " + std::to_string(config.input_dim) +
                                " features, dataset has " + std::to_string(data.cols()));
  }

  MdnModel m = MdnModel::initialize(config, tc.seed);
  m.standardizer = Standardizer::fit(data.features);
  initialize_heads(m, data.response);

  OptimizerState optimizer(tc.optimizer, tc.learning_rate, m.params);
  Engine shuffle_rng(derive_seed(tc.seed, seed_tag::kShuffle));
  Engine dropout_rng(derive_seed(tc.seed, seed_tag::kDropout));

  const double initial = loss_and_gradients(m, data.features, data.response, nullptr, nullptr);
  if (history) {
    history->initial_loss = initial;
    history->epoch_loss.clear();
    history->epoch_loss.reserve(tc.epochs);
  }

  const std::size_t n = data.rows();
  const std::size_t p = data.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  ParameterSet grad = m.params.zeros_like();
  FeatureMatrix bx;
  std::vector<double> by;

  for (std::size_t epoch = 0; epoch < tc.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_total = 0.0;
    std::size_t batch_index = 0;
    for (std::size_t start = 0; start < n; start += tc.batch_size, ++batch_index) {
      const std::size_t len = std::min(tc.batch_size, n - start);
      bx.resize(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(p));
      by.resize(len);
      for (std::size_t r = 0; r < len; ++r) {
        const std::size_t src = order[start + r];
        bx.row(static_cast<Eigen::Index>(r)) = data.features.row(static_cast<Eigen::Index>(src));
        by[r] = data.response[src];
      }
      const double loss = loss_and_gradients(m, bx, by, &dropout_rng, &grad);
      if (!std::isfinite(loss) || !grad.all_finite()) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(batch_index),
                            epoch, batch_index);
      }
      optimizer.step(m.params, grad);
      if (!m.params.all_finite()) {
        throw TrainingError("non-finite parameter after epoch " + std::to_string(epoch) +
                                ", batch " + std::to_string(batch_index),
                            epoch, batch_index);
      }
      epoch_total += loss * static_cast<double>(len);
    }
    if (history) history->epoch_loss.push_back(epoch_total / static_cast<double>(n));
  }

  if (history) {
    history->final_loss = loss_and_gradients(m, data.features, data.response, nullptr, nullptr);
  }
  return m;
}

}  // namespace cuspmdn
