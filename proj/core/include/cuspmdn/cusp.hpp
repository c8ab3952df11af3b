#pragma once

// Equilibrium geometry of the cusp catastrophe.
//
// The potential is V(y) = alpha*y + (beta/2)*y^2 - y^4/4 and the equilibrium
// surface is its gradient, alpha + beta*y - y^3 = 0. Depending on the sign of
// the scaled Cardan discriminant 27*alpha^2 - 4*beta^3 the surface has one
// real root (outside the cusp region) or three (inside it).

#include <array>
#include <cstddef>
#include <span>

namespace cuspmdn {

/// Latent control pair (asymmetry alpha, bifurcation beta). Always finite.
class ControlParams {
 public:
  ControlParams() = default;
  /// Throws std::invalid_argument when either value is NaN or infinite.
  ControlParams(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }

  friend bool operator==(const ControlParams&, const ControlParams&) = default;

 private:
  double alpha_ = 0.0;
  double beta_ = 0.0;
};

enum class Stability { Stable, Unstable };

/// Distinct real roots of alpha + beta*y - y^3 in ascending order, each with
/// its stability label, plus the discriminant that produced them.
class RootSet {
 public:
  RootSet() = default;

  std::span<const double> roots() const noexcept { return {roots_.data(), count_}; }
  std::span<const Stability> stability() const noexcept {
    return {stability_.data(), count_};
  }
  std::size_t size() const noexcept { return count_; }
  double discriminant() const noexcept { return discriminant_; }

  double root(std::size_t i) const { return roots_.at(i); }
  bool is_stable(std::size_t i) const { return stability_.at(i) == Stability::Stable; }

  /// Builds from ascending, distinct roots. Used by the solver; exposed so
  /// tests can construct hand-made sets.
  static RootSet from_sorted(std::span<const double> roots,
                             std::span<const Stability> stability,
                             double discriminant);

 private:
  std::array<double, 3> roots_{};
  std::array<Stability, 3> stability_{};
  std::size_t count_ = 0;
  double discriminant_ = 0.0;
};

/// 27*alpha^2 - 4*beta^3, exactly as written.
double cardan_discriminant(ControlParams p) noexcept;

/// alpha*y + (beta/2)*y^2 - y^4/4.
double potential(double y, ControlParams p) noexcept;

/// alpha + beta*y - y^3 (the gradient of the potential).
double equilibrium_residual(double y, ControlParams p) noexcept;

/// Real roots of the equilibrium cubic. Viete's trigonometric form is used
/// when the discriminant is negative and Cardano's formula when it is
/// positive. A zero discriminant yields the repeated root labelled Unstable.
RootSet solve_equilibrium(ControlParams p);

/// Root with the highest potential (Maxwell convention). Exact ties go to the
/// larger root.
double maxwell_root(ControlParams p);

/// Stable root closest to `observed` (delay convention). Ties go to the larger
/// root. If the set carries no stable root (degenerate discriminant) all
/// roots are candidates.
double delay_root(const RootSet& roots, double observed);

}  // namespace cuspmdn
