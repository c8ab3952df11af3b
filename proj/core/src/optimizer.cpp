#include <cmath>
#include <vector>

#include "cuspmdn/mdn.hpp"

namespace cuspmdn {

namespace {

std::vector<std::span<double>> blocks(ParameterSet& p) {
  std::vector<std::span<double>> out;
  p.visit([&out](std::span<double> s) { out.push_back(s); });
  return out;
}

std::vector<std::span<const double>> blocks(const ParameterSet& p) {
  std::vector<std::span<const double>> out;
  p.visit([&out](std::span<const double> s) { out.push_back(s); });
  return out;
}

}  // namespace

OptimizerState::OptimizerState(Optimizer kind, double learning_rate, const ParameterSet& shape)
    : kind_(kind), lr_(learning_rate), first_(shape.zeros_like()), second_(shape.zeros_like()) {}

void OptimizerState::step(ParameterSet& params, const ParameterSet& grad) {
  ++steps_;
  auto p = blocks(params);
  const auto g = blocks(grad);
  auto m = blocks(first_);
  auto v = blocks(second_);
  if (p.size() != g.size() || p.size() != m.size()) {
    throw std::invalid_argument("OptimizerState::step: parameter and gradient shapes differ");
  }
  const double t = static_cast<double>(steps_);
  const double bias1 = 1.0 - std::pow(kAdamBeta1, t);
  const double bias2 = 1.0 - std::pow(kAdamBeta2, t);
  for (std::size_t b = 0; b < p.size(); ++b) {
    if (p[b].size() != g[b].size()) {
      throw std::invalid_argument("OptimizerState::step: parameter and gradient shapes differ");
    }
    for (std::size_t i = 0; i < p[b].size(); ++i) {
      const double gi = g[b][i];
      switch (kind_) {
        case Optimizer::SGD:
          p[b][i] -= lr_ * gi;
          break;
        case Optimizer::RMSProp:
          v[b][i] = kRmsDecay * v[b][i] + (1.0 - kRmsDecay) * gi * gi;
          p[b][i] -= lr_ * gi / (std::sqrt(v[b][i]) + kEpsilon);
          break;
        case Optimizer::Adam:
          m[b][i] = kAdamBeta1 * m[b][i] + (1.0 - kAdamBeta1) * gi;
          v[b][i] = kAdamBeta2 * v[b][i] + (1.0 - kAdamBeta2) * gi * gi;
          p[b][i] -= lr_ * (m[b][i] / bias1) / (std::sqrt(v[b][i] / bias2) + kEpsilon);
          break;
      }
    }
  }
}

}  // namespace cuspmdn
