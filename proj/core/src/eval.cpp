#include "cuspmdn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cuspmdn {

std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw std::invalid_argument("split: fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = data.rows();
  const auto first = static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction));
  if (first == 0 || first == n) {
    throw std::invalid_argument("split: fraction " + std::to_string(fraction) + " of " +
                                std::to_string(n) + " rows leaves one side empty");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine rng(derive_seed(seed, seed_tag::kSplit));
  std::shuffle(order.begin(), order.end(), rng);
  const std::span<const std::size_t> all(order);
  return {data.subset(all.first(first)), data.subset(all.subspan(first))};
}

std::size_t closest_component(const MixturePrediction& pred, double y) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < pred.k(); ++i) {
    if (std::abs(pred.means[i] - y) < std::abs(pred.means[best] - y)) best = i;
  }
  return best;
}

std::vector<ScoredRow> score_rows(const MdnModel& m, const Dataset& data) {
  const auto preds = predict_batch(m, data.features);
  std::vector<ScoredRow> rows;
  rows.reserve(preds.size());
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double y = data.response[i];
    const double fitted = preds[i].means[closest_component(preds[i], y)];
    rows.push_back({y, fitted, (fitted - y) * (fitted - y)});
  }
  return rows;
}

double delay_mse(const MdnModel& m, const Dataset& data) {
  if (data.rows() == 0) throw std::invalid_argument("delay_mse: empty dataset");
  const auto rows = score_rows(m, data);
  double total = 0.0;
  for (const auto& r : rows) total += r.squared_error;
  return total / static_cast<double>(rows.size());
}

ExperimentResult run_on_dataset(const Dataset& data, std::string model_kind,
                                std::span<const NetworkConfig> nets, TrainConfig training,
                                std::uint64_t seed, double train_fraction) {
  ExperimentResult result;
  std::tie(result.train, result.test) = split(data, train_fraction, seed);
  training.seed = derive_seed(seed, seed_tag::kTrain);
  for (std::size_t j = 0; j < nets.size(); ++j) {
    MdnModel model;
    try {
      model = train(result.train, nets[j], training);
    } catch (const TrainingError& e) {
      throw ExperimentError("network spec #" + std::to_string(j) + " (k=" +
                            std::to_string(nets[j].k) + "): " + e.what());
    }
    EvalReport report;
    report.model_kind = model_kind;
    report.k = nets[j].k;
    report.n_train = result.train.rows();
    report.n_test = result.test.rows();
    report.train_mse = delay_mse(model, result.train);
    report.rows = score_rows(model, result.test);
    double total = 0.0;
    for (const auto& r : report.rows) total += r.squared_error;
    report.test_mse = total / static_cast<double>(report.rows.size());
    result.reports.push_back(std::move(report));
    result.models.push_back(std::move(model));
  }
  return result;
}

ExperimentResult run_experiment_detailed(GenConfig gen, std::span<const NetworkConfig> nets,
                                         TrainConfig training, std::uint64_t seed,
                                         double train_fraction) {
  gen.seed = derive_seed(seed, seed_tag::kData);
  const Dataset data = generate(gen);
  return run_on_dataset(data, std::string(to_string(gen.model)), nets, training, seed,
                        train_fraction);
}

std::vector<EvalReport> run_experiment(const GenConfig& gen, std::span<const NetworkConfig> nets,
                                       const TrainConfig& training, std::uint64_t seed,
                                       double train_fraction) {
  return run_experiment_detailed(gen, nets, training, seed, train_fraction).reports;
}

}  // namespace cuspmdn
