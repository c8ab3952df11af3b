#pragma once

// Splitting and scoring. Fitted values follow the delay convention: each row
// is scored against whichever predicted component mean lies closest to the
// observed response. For k = 1 this is the ordinary MSE. Errors are always in
// raw response units.

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cuspmdn/datagen.hpp"
#include "cuspmdn/mdn.hpp"

namespace cuspmdn {

struct ScoredRow {
  double observed = 0.0;
  double fitted = 0.0;
  double squared_error = 0.0;

  friend bool operator==(const ScoredRow&, const ScoredRow&) = default;
};

struct EvalReport {
  std::string model_kind;
  std::size_t k = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  std::vector<ScoredRow> rows;  // test rows

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Seeded shuffle into floor(n*fraction) and the remainder. Latent columns
/// travel with their rows.
std::pair<Dataset, Dataset> split(const Dataset& data, double fraction, std::uint64_t seed);

/// Index of the mean closest to y (first one on ties).
std::size_t closest_component(const MixturePrediction& pred, double y);

std::vector<ScoredRow> score_rows(const MdnModel& m, const Dataset& data);
double delay_mse(const MdnModel& m, const Dataset& data);

class ExperimentError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentResult {
  Dataset train;
  Dataset test;
  std::vector<MdnModel> models;
  std::vector<EvalReport> reports;
};

/// Generates one dataset, splits it, trains every network on the same train
/// half and scores both halves. All randomness comes from `seed`: the
/// generator, split and training seeds inside `gen`/`training` are replaced
/// by sub-seeds of it.
ExperimentResult run_experiment_detailed(GenConfig gen, std::span<const NetworkConfig> nets,
                                         TrainConfig training, std::uint64_t seed,
                                         double train_fraction = 0.5);

std::vector<EvalReport> run_experiment(const GenConfig& gen, std::span<const NetworkConfig> nets,
                                       const TrainConfig& training, std::uint64_t seed,
                                       double train_fraction = 0.5);

/// Same protocol on an existing dataset (e.g. an external CSV).
ExperimentResult run_on_dataset(const Dataset& data, std::string model_kind,
                                std::span<const NetworkConfig> nets, TrainConfig training,
                                std::uint64_t seed, double train_fraction = 0.5);

}  // namespace cuspmdn
