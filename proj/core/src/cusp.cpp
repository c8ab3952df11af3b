#include "cuspmdn/cusp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace cuspmdn {

ControlParams::ControlParams(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!std::isfinite(alpha) || !std::isfinite(beta)) {
    throw std::invalid_argument("ControlParams: alpha and beta must be finite");
  }
}

RootSet RootSet::from_sorted(std::span<const double> roots,
                             std::span<const Stability> stability,
                             double discriminant) {
  if (roots.empty() || roots.size() > 3 || roots.size() != stability.size()) {
    throw std::invalid_argument("RootSet: need 1-3 roots with matching stability labels");
  }
  if (!std::is_sorted(roots.begin(), roots.end()) ||
      std::adjacent_find(roots.begin(), roots.end()) != roots.end()) {
    throw std::invalid_argument("RootSet: roots must be distinct and ascending");
  }
  RootSet r;
  r.count_ = roots.size();
  std::copy(roots.begin(), roots.end(), r.roots_.begin());
  std::copy(stability.begin(), stability.end(), r.stability_.begin());
  r.discriminant_ = discriminant;
  return r;
}

double cardan_discriminant(ControlParams p) noexcept {
  return 27.0 * p.alpha() * p.alpha() - 4.0 * p.beta() * p.beta() * p.beta();
}

double potential(double y, ControlParams p) noexcept {
  const double y2 = y * y;
  return p.alpha() * y + 0.5 * p.beta() * y2 - 0.25 * y2 * y2;
}

double equilibrium_residual(double y, ControlParams p) noexcept {
  return p.alpha() + p.beta() * y - y * y * y;
}

namespace {

// One Newton step on alpha + beta*y - y^3, kept only if it lowers the residual.
double polish(double y, double alpha, double beta) {
  const double f = alpha + beta * y - y * y * y;
  const double df = beta - 3.0 * y * y;
  if (df == 0.0 || f == 0.0) return y;
  const double next = y - f / df;
  const double f_next = alpha + beta * next - next * next * next;
  return std::abs(f_next) < std::abs(f) ? next : y;
}

// Roots for alpha >= 0, ascending. Negative alpha is handled by reflection so
// that solve(-alpha, beta) is the exact mirror image of solve(alpha, beta).
struct RawRoots {
  std::array<double, 3> y{};
  std::array<Stability, 3> s{};
  std::size_t n = 0;
};

RawRoots solve_nonnegative_alpha(double alpha, double beta, double disc) {
  RawRoots out;
  if (disc > 0.0) {
    // Cardano. D = disc/108 = alpha^2/4 - beta^3/27 > 0.
    if (alpha == 0.0) {
      out.y[0] = 0.0;  // beta < 0 here, y(y^2 - beta) = 0
    } else {
      const double d = 0.25 * alpha * alpha - beta * beta * beta / 27.0;
      const double u = std::cbrt(0.5 * alpha + std::sqrt(std::max(d, 0.0)));
      const double v = beta / (3.0 * u);
      out.y[0] = polish(u + v, alpha, beta);
    }
    out.s[0] = Stability::Stable;
    out.n = 1;
    return out;
  }
  if (disc < 0.0) {
    // Viete. disc < 0 implies beta > 0.
    if (alpha == 0.0) {
      const double r = std::sqrt(beta);
      out.y = {-r, 0.0, r};
    } else {
      const double m = 2.0 * std::sqrt(beta / 3.0);
      const double c = std::clamp(1.5 * alpha / beta * std::sqrt(3.0 / beta), -1.0, 1.0);
      const double theta = std::acos(c) / 3.0;
      constexpr double third = 2.0 * std::numbers::pi / 3.0;
      out.y = {m * std::cos(theta - 2.0 * third), m * std::cos(theta - third),
               m * std::cos(theta)};
      std::sort(out.y.begin(), out.y.end());
      for (double& y : out.y) y = polish(y, alpha, beta);
      std::sort(out.y.begin(), out.y.end());
    }
    out.s = {Stability::Stable, Stability::Unstable, Stability::Stable};
    out.n = 3;
    // Rounding right at the fold can merge two roots; fall through to the
    // degenerate labelling in that case.
    if (out.y[0] != out.y[1] && out.y[1] != out.y[2]) return out;
  }
  // Degenerate: (y - r)^2 (y + 2r) with r = -cbrt(alpha/2).
  if (alpha == 0.0 && beta == 0.0) {
    out.y[0] = 0.0;
    out.s[0] = Stability::Unstable;
    out.n = 1;
    return out;
  }
  const double r = -std::cbrt(0.5 * alpha);
  const double simple = -2.0 * r;
  // alpha >= 0 gives r <= 0 < simple.
  out.y = {r, simple, 0.0};
  out.s = {Stability::Unstable, Stability::Stable, Stability::Stable};
  out.n = 2;
  return out;
}

}  // namespace

RootSet solve_equilibrium(ControlParams p) {
  const double disc = cardan_discriminant(p);
  const bool mirrored = p.alpha() < 0.0;
  RawRoots raw = solve_nonnegative_alpha(std::abs(p.alpha()), p.beta(), disc);
  if (mirrored) {
    std::reverse(raw.y.begin(), raw.y.begin() + raw.n);
    std::reverse(raw.s.begin(), raw.s.begin() + raw.n);
    for (std::size_t i = 0; i < raw.n; ++i) raw.y[i] = -raw.y[i];
  }
  return RootSet::from_sorted({raw.y.data(), raw.n}, {raw.s.data(), raw.n}, disc);
}

double maxwell_root(ControlParams p) {
  const RootSet set = solve_equilibrium(p);
  const auto roots = set.roots();
  double best = roots[0];
  double best_v = potential(best, p);
  for (std::size_t i = 1; i < roots.size(); ++i) {
    const double v = potential(roots[i], p);
    if (v >= best_v) {
      best = roots[i];
      best_v = v;
    }
  }
  return best;
}

double delay_root(const RootSet& set, double observed) {
  const auto roots = set.roots();
  const auto stability = set.stability();
  const bool any_stable =
      std::find(stability.begin(), stability.end(), Stability::Stable) != stability.end();
  double best = 0.0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (any_stable && stability[i] != Stability::Stable) continue;
    const double d = std::abs(roots[i] - observed);
    if (d <= best_d) {
      best = roots[i];
      best_d = d;
    }
  }
  return best;
}

}  // namespace cuspmdn
