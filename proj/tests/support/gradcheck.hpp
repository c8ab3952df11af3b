#pragma once

// Central finite-difference check of the analytic NLL gradient.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "cuspmdn/mdn.hpp"

namespace oracle {

inline constexpr double kFdStep = 1e-5;
/// Denominator floor so gradients that are zero up to rounding are compared
/// absolutely.
inline constexpr double kFdFloor = 1e-6;

/// Random parameters with fan-in scaled weights and small nonzero biases, so
/// hidden activations and the loss stay O(1). Exactly-zero biases would park
/// ReLU units fed by a dead layer on their kink.
template <class Rng>
void draw_parameters(cuspmdn::MdnModel& m, Rng& rng) {
  std::normal_distribution<double> unit(0.0, 1.0);
  auto fill = [&](cuspmdn::DenseLayer& l) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(l.weights.cols()));
    for (Eigen::Index i = 0; i < l.weights.size(); ++i) l.weights.data()[i] = scale * unit(rng);
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) l.bias(i) = 0.1 * unit(rng);
  };
  for (auto& l : m.params.hidden) fill(l);
  fill(m.params.mean_head);
  fill(m.params.scale_head);
  fill(m.params.weight_head);
}

struct GradCheck {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  /// ReLU parameters whose +-h stencil switched some unit on or off; the loss
  /// is not differentiable inside such a stencil, so no comparison is made.
  std::size_t kink_crossings = 0;
};

/// On/off pattern of every ReLU unit for every row.
inline std::vector<bool> relu_pattern(const cuspmdn::MdnModel& m, const cuspmdn::FeatureMatrix& x) {
  Eigen::MatrixXd h = x.transpose();
  for (Eigen::Index j = 0; j < h.rows(); ++j) {
    const auto c = static_cast<std::size_t>(j);
    h.row(j) = (h.row(j).array() - m.standardizer.mean[c]) / m.standardizer.sd[c];
  }
  std::vector<bool> on;
  for (const auto& l : m.params.hidden) {
    Eigen::MatrixXd z = l.weights * h;
    z.colwise() += l.bias;
    for (Eigen::Index i = 0; i < z.size(); ++i) on.push_back(z.data()[i] > 0);
    h = z.cwiseMax(0.0);
  }
  return on;
}

inline GradCheck check_gradients(const cuspmdn::MdnModel& model, const cuspmdn::FeatureMatrix& x,
                                 std::span<const double> y) {
  const cuspmdn::ParameterSet analytic = cuspmdn::gradients(model, x, y);
  std::vector<double> flat;
  analytic.visit([&](std::span<const double> s) { flat.insert(flat.end(), s.begin(), s.end()); });

  cuspmdn::MdnModel probe = model;
  std::vector<double*> slots;
  probe.params.visit([&](std::span<double> s) {
    for (double& v : s) slots.push_back(&v);
  });

  const bool relu = model.config.activation == cuspmdn::Activation::ReLU;
  GradCheck out;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    const double saved = *slots[i];
    *slots[i] = saved + kFdStep;
    const double up = cuspmdn::loss_and_gradients(probe, x, y, nullptr, nullptr);
    const auto up_pattern = relu ? relu_pattern(probe, x) : std::vector<bool>{};
    *slots[i] = saved - kFdStep;
    const double down = cuspmdn::loss_and_gradients(probe, x, y, nullptr, nullptr);
    const bool crossed = relu && relu_pattern(probe, x) != up_pattern;
    *slots[i] = saved;
    if (crossed) {
      ++out.kink_crossings;
      continue;
    }
    const double fd = (up - down) / (2.0 * kFdStep);
    const double denom = std::max({std::abs(fd), std::abs(flat[i]), kFdFloor});
    out.max_rel_error = std::max(out.max_rel_error, std::abs(fd - flat[i]) / denom);
    ++out.checked;
  }
  return out;
}

}  // namespace oracle
