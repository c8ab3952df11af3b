#include "cuspmdn/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace cuspmdn {

namespace {

// Walks outward from `start` in direction `dir` until the log-density drops
// below `threshold`, then bisects the crossing. The density is monotone
// beyond the outermost root, so the crossing is unique.
double find_tail(ControlParams p, double start, double dir, double threshold) {
  double step = 1.0;
  while (potential(start + dir * step, p) > threshold) step *= 2.0;
  double inside = start + dir * step * 0.5;
  if (potential(inside, p) <= threshold) inside = start;
  double outside = start + dir * step;
  for (int i = 0; i < 200 && inside != outside; ++i) {
    const double mid = 0.5 * (inside + outside);
    if (mid == inside || mid == outside) break;
    (potential(mid, p) > threshold ? inside : outside) = mid;
  }
  return outside;
}

}  // namespace

StationaryCuspSampler::StationaryCuspSampler(ControlParams p) : params_(p) {
  const RootSet set = solve_equilibrium(p);
  const auto roots = set.roots();
  log_mode_ = potential(maxwell_root(p), p);
  const double threshold = log_mode_ + std::log(kTruncation);
  lower_ = find_tail(p, roots.front(), -1.0, threshold);
  upper_ = find_tail(p, roots.back(), 1.0, threshold);
  width_ = (upper_ - lower_) / static_cast<double>(kCells);

  cell_log_max_.resize(kCells);
  cumulative_.resize(kCells);
  double total = 0.0;
  for (std::size_t c = 0; c < kCells; ++c) {
    const double a = lower_ + width_ * static_cast<double>(c);
    const double b = c + 1 == kCells ? upper_ : a + width_;
    double m = std::max(potential(a, p), potential(b, p));
    for (double r : roots) {
      if (r > a && r < b) m = std::max(m, potential(r, p));
    }
    cell_log_max_[c] = m;
    total += (b - a) * std::exp(m - log_mode_);
    cumulative_[c] = total;
  }
}

double StationaryCuspSampler::operator()(Engine& rng) const {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double total = cumulative_.back();
  for (;;) {
    const double pick = unit(rng) * total;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), pick);
    const std::size_t c =
        std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), kCells - 1);
    const double a = lower_ + width_ * static_cast<double>(c);
    const double b = c + 1 == kCells ? upper_ : a + width_;
    const double y = a + (b - a) * unit(rng);
    const double accept = std::exp(potential(y, params_) - cell_log_max_[c]);
    if (unit(rng) < accept) return y;
  }
}

double sde_stationary_sample(ControlParams p, Engine& rng) {
  return StationaryCuspSampler(p)(rng);
}

}  // namespace cuspmdn
