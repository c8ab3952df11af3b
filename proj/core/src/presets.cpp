#include "cuspmdn/presets.hpp"

#include <stdexcept>

namespace cuspmdn::presets {

const std::array<Table1Row, 5>& table1_rows() {
  static const std::array<Table1Row, 5> rows{{
      {{0.8374, 0.5228, 3.1822}, {3.5324, 0.1579, 4.6811}, 1.207, 0.8773},
      {{1.7122, 3.8342, 2.4415}, {2.7407, 3.1888, 4.0322}, 1.0242, 0.9468},
      {{1.198, 2.7108, 4.0073}, {2.1903, 4.3106, 4.5244}, 1.2273, 0.9539},
      {{0.419, 0.6107, 3.5677}, {1.8378, 3.1572, 3.4127}, 0.9218, 1.08},
      {{4.2665, 2.6617, 3.6516}, {0.8548, 3.5857, 4.0862}, 1.0409, 1.0241},
  }};
  return rows;
}

NetworkConfig default_network(std::size_t k) {
  NetworkConfig nc;
  nc.hidden_sizes = {32, 32, 32};
  nc.activation = Activation::ReLU;
  nc.dropout_rate = 0.1;
  nc.k = k;
  return nc;
}

NetworkConfig bimodal_network(std::size_t k) {
  NetworkConfig nc = default_network(k);
  nc.activation = Activation::Tanh;
  return nc;
}

TrainConfig default_training() {
  TrainConfig tc;
  tc.epochs = 500;
  tc.batch_size = 32;
  tc.learning_rate = 1e-3;
  tc.optimizer = Optimizer::Adam;
  return tc;
}

GenConfig table1_config(std::size_t row) {
  const auto& rows = table1_rows();
  if (row >= rows.size()) throw std::out_of_range("table1_config: row index out of range");
  GenConfig g;
  g.n = kTable1N;
  g.p = 2;
  g.coeffs.a.assign(rows[row].a.begin(), rows[row].a.end());
  g.coeffs.b.assign(rows[row].b.begin(), rows[row].b.end());
  g.noise_sd = 1.0;
  g.feature_sd = 2.0;
  g.model = GenModel::RegCusp;
  return g;
}

GenConfig bimodal_config() {
  GenConfig g = table1_config(0);
  g.n = kBimodalN;
  g.model = GenModel::BimodalRegCusp;
  return g;
}

GenConfig sde_config() {
  GenConfig g = table1_config(0);
  g.n = kSdeN;
  g.model = GenModel::SdeCusp;
  return g;
}

GenConfig oliva_config() {
  GenConfig g;
  g.n = kOlivaN;
  g.model = GenModel::Oliva;
  return g;
}

}  // namespace cuspmdn::presets
