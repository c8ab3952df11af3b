#pragma once

// Seeded synthetic data from the cusp models: RegCusp (Maxwell root plus
// Gaussian noise), Bimodal RegCusp (either stable root with probability 1/2),
// SdeCusp (draws from the stationary density) and the Oliva design.
//
// Row i of every generator draws from row_stream(seed, i) only, in a fixed
// order: features, then Gaussian noise, then the branch coin or the
// stationary-density draw. Datasets are therefore independent of evaluation
// order, and a Bimodal row outside the cusp region equals the RegCusp row for
// the same seed.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "cuspmdn/cusp.hpp"
#include "cuspmdn/rng.hpp"

namespace cuspmdn {

using FeatureMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// alpha = a0 + sum a_j x_j, beta = b0 + sum b_j x_j. Intercepts first.
struct RegressionCoeffs {
  std::vector<double> a;
  std::vector<double> b;

  std::size_t feature_count() const noexcept { return a.empty() ? 0 : a.size() - 1; }
  void validate() const;
};

/// Each coefficient drawn from U(0, 5).
RegressionCoeffs random_coeffs(std::size_t p, std::uint64_t seed);

enum class GenModel { RegCusp, BimodalRegCusp, SdeCusp, Oliva };

std::string_view to_string(GenModel m) noexcept;
/// Accepts "regcusp", "bimodal", "sdecusp"/"sde", "oliva". Throws on anything else.
GenModel parse_gen_model(std::string_view name);

struct GenConfig {
  std::size_t n = 500;
  std::size_t p = 2;
  RegressionCoeffs coeffs;
  double noise_sd = 1.0;
  double feature_sd = 2.0;
  std::uint64_t seed = 0;
  GenModel model = GenModel::RegCusp;

  /// Oliva ignores p, coeffs, noise_sd and feature_sd.
  void validate() const;
};

enum class Branch : int { Lower = -1, Single = 0, Upper = 1 };

/// Ground truth kept alongside generated data.
struct LatentTruth {
  std::vector<ControlParams> controls;
  std::vector<double> noiseless_root;
  std::vector<Branch> branch;
};

struct Dataset {
  FeatureMatrix features;
  std::vector<double> response;
  std::optional<LatentTruth> latent;

  std::size_t rows() const noexcept { return response.size(); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(features.cols()); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols(), cols()};
  }
  /// True when the latent controls put row i inside the cusp region.
  bool in_cusp_region(std::size_t i) const;

  /// Throws std::invalid_argument on mismatched row counts or NaN.
  void validate() const;
  Dataset subset(std::span<const std::size_t> rows) const;
};

/// Share of rows with a negative discriminant; 0 when latent is absent.
double cusp_fraction(const Dataset& d);

ControlParams compute_controls(std::span<const double> x, const RegressionCoeffs& c);

Dataset gen_regcusp(const GenConfig& cfg);
Dataset gen_bimodal(const GenConfig& cfg);
Dataset gen_sdecusp(const GenConfig& cfg);

/// Oliva design with its auxiliary U columns, which are not model features.
struct OlivaData {
  Dataset data;
  std::vector<double> u1;
  std::vector<double> u2;
};

OlivaData gen_oliva(std::size_t n, std::uint64_t seed);

/// Dispatch on cfg.model.
Dataset generate(const GenConfig& cfg);

}  // namespace cuspmdn
