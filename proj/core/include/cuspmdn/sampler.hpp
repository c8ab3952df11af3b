#pragma once

#include <cstddef>
#include <vector>

#include "cuspmdn/cusp.hpp"
#include "cuspmdn/rng.hpp"

namespace cuspmdn {

/// Exact sampler for the stationary density of the cusp diffusion,
/// f(y) proportional to exp(alpha*y + beta*y^2/2 - y^4/4), by rejection under a
/// piecewise-constant majorizer.
///
/// The support is truncated where the density drops below 1e-16 of its mode.
/// Each cell bound is exact: the maximum of the quartic over a cell is taken
/// over its endpoints and any equilibrium root inside it.
class StationaryCuspSampler {
 public:
  static constexpr std::size_t kCells = 512;
  static constexpr double kTruncation = 1e-16;

  explicit StationaryCuspSampler(ControlParams p);

  double operator()(Engine& rng) const;

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }
  ControlParams params() const noexcept { return params_; }
  /// Log-density at the mode (the Maxwell root).
  double log_mode() const noexcept { return log_mode_; }

 private:
  ControlParams params_;
  double lower_ = 0.0;
  double upper_ = 0.0;
  double width_ = 0.0;
  double log_mode_ = 0.0;
  std::vector<double> cell_log_max_;
  std::vector<double> cumulative_;
};

/// Single draw; builds a fresh envelope for `p`.
double sde_stationary_sample(ControlParams p, Engine& rng);

}  // namespace cuspmdn
