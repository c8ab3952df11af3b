#include "cuspmdn/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cuspmdn/sampler.hpp"

namespace cuspmdn {

void RegressionCoeffs::validate() const {
  if (a.size() != b.size()) {
    throw std::invalid_argument("RegressionCoeffs: a and b must have equal length");
  }
  if (a.size() < 2) {
    throw std::invalid_argument("RegressionCoeffs: need an intercept and at least one slope");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(a.begin(), a.end(), finite) || !std::all_of(b.begin(), b.end(), finite)) {
    throw std::invalid_argument("RegressionCoeffs: entries must be finite");
  }
}

RegressionCoeffs random_coeffs(std::size_t p, std::uint64_t seed) {
  Engine rng(derive_seed(seed, seed_tag::kData));
  std::uniform_real_distribution<double> u(0.0, 5.0);
  RegressionCoeffs c;
  for (std::size_t j = 0; j <= p; ++j) c.a.push_back(u(rng));
  for (std::size_t j = 0; j <= p; ++j) c.b.push_back(u(rng));
  return c;
}

std::string_view to_string(GenModel m) noexcept {
  switch (m) {
    case GenModel::RegCusp: return "regcusp";
    case GenModel::BimodalRegCusp: return "bimodal";
    case GenModel::SdeCusp: return "sdecusp";
    case GenModel::Oliva: return "oliva";
  }
  return "unknown";
}

GenModel parse_gen_model(std::string_view name) {
  if (name == "regcusp") return GenModel::RegCusp;
  if (name == "bimodal") return GenModel::BimodalRegCusp;
  if (name == "sdecusp" || name == "sde") return GenModel::SdeCusp;
  if (name == "oliva") return GenModel::Oliva;
  throw std::invalid_argument("unknown generator model '" + std::string(name) + "'");
}

void GenConfig::validate() const {
  if (n < 2) throw std::invalid_argument("GenConfig: n must be at least 2");
  if (model == GenModel::Oliva) return;
  if (p < 1) throw std::invalid_argument("GenConfig: p must be positive");
  coeffs.validate();
  if (coeffs.feature_count() != p) {
    throw std::invalid_argument("GenConfig: coefficient vectors must have length p+1");
  }
  if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) {
    throw std::invalid_argument("GenConfig: noise_sd must be finite and nonnegative");
  }
  if (!(feature_sd > 0.0) || !std::isfinite(feature_sd)) {
    throw std::invalid_argument("GenConfig: feature_sd must be finite and positive");
  }
}

bool Dataset::in_cusp_region(std::size_t i) const {
  return latent && cardan_discriminant(latent->controls.at(i)) < 0.0;
}

void Dataset::validate() const {
  const auto n = response.size();
  if (static_cast<std::size_t>(features.rows()) != n) {
    throw std::invalid_argument("Dataset: feature and response row counts differ");
  }
  if (latent && (latent->controls.size() != n || latent->noiseless_root.size() != n ||
                 latent->branch.size() != n)) {
    throw std::invalid_argument("Dataset: latent columns must match the row count");
  }
  if (features.hasNaN() ||
      std::any_of(response.begin(), response.end(), [](double v) { return std::isnan(v); })) {
    throw std::invalid_argument("Dataset: NaN present");
  }
  if (latent && std::any_of(latent->noiseless_root.begin(), latent->noiseless_root.end(),
                            [](double v) { return std::isnan(v); })) {
    throw std::invalid_argument("Dataset: NaN present in latent roots");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out;
  out.features.resize(static_cast<Eigen::Index>(idx.size()), features.cols());
  out.response.reserve(idx.size());
  if (latent) out.latent.emplace();
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto i = idx[r];
    if (i >= rows()) throw std::out_of_range("Dataset::subset: row index out of range");
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(i));
    out.response.push_back(response[i]);
    if (latent) {
      out.latent->controls.push_back(latent->controls[i]);
      out.latent->noiseless_root.push_back(latent->noiseless_root[i]);
      out.latent->branch.push_back(latent->branch[i]);
    }
  }
  return out;
}

double cusp_fraction(const Dataset& d) {
  if (!d.latent || d.rows() == 0) return 0.0;
  std::size_t inside = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) inside += d.in_cusp_region(i) ? 1 : 0;
  return static_cast<double>(inside) / static_cast<double>(d.rows());
}

ControlParams compute_controls(std::span<const double> x, const RegressionCoeffs& c) {
  if (c.a.size() != x.size() + 1 || c.b.size() != x.size() + 1) {
    throw std::invalid_argument("compute_controls: expected " + std::to_string(x.size() + 1) +
                                " coefficients per control");
  }
  double alpha = c.a[0];
  double beta = c.b[0];
  for (std::size_t j = 0; j < x.size(); ++j) {
    alpha += c.a[j + 1] * x[j];
    beta += c.b[j + 1] * x[j];
  }
  return {alpha, beta};
}

namespace {

enum class RootRule { Maxwell, CoinFlip, Stationary };

Branch branch_of(const RootSet& set, double chosen) {
  if (set.size() != 3) return Branch::Single;
  return chosen < set.root(1) ? Branch::Lower : Branch::Upper;
}

Dataset generate_regression(const GenConfig& cfg, RootRule rule) {
  cfg.validate();
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(cfg.n), static_cast<Eigen::Index>(cfg.p));
  d.response.resize(cfg.n);
  LatentTruth& latent = d.latent.emplace();
  latent.controls.resize(cfg.n);
  latent.noiseless_root.resize(cfg.n);
  latent.branch.resize(cfg.n);

  for (std::size_t i = 0; i < cfg.n; ++i) {
    Engine rng = row_stream(cfg.seed, i);
    std::normal_distribution<double> feature(0.0, cfg.feature_sd);
    double* x = d.features.data() + i * cfg.p;
    for (std::size_t j = 0; j < cfg.p; ++j) x[j] = feature(rng);

    const ControlParams p = compute_controls({x, cfg.p}, cfg.coeffs);
    const RootSet set = solve_equilibrium(p);
    latent.controls[i] = p;

    if (rule == RootRule::Stationary) {
      const double y = sde_stationary_sample(p, rng);
      d.response[i] = y;
      latent.noiseless_root[i] = delay_root(set, y);
      latent.branch[i] = branch_of(set, latent.noiseless_root[i]);
      continue;
    }

    std::normal_distribution<double> noise_dist(0.0, 1.0);
    const double noise = cfg.noise_sd * noise_dist(rng);
    double root = maxwell_root(p);
    if (rule == RootRule::CoinFlip && set.size() == 3) {
      std::bernoulli_distribution upper(0.5);
      root = upper(rng) ? set.root(2) : set.root(0);
    }
    latent.noiseless_root[i] = root;
    latent.branch[i] = branch_of(set, root);
    d.response[i] = root + noise;
  }
  return d;
}

}  // namespace

Dataset gen_regcusp(const GenConfig& cfg) {
  if (cfg.model != GenModel::RegCusp) throw std::invalid_argument("gen_regcusp: model is not RegCusp");
  return generate_regression(cfg, RootRule::Maxwell);
}

Dataset gen_bimodal(const GenConfig& cfg) {
  if (cfg.model != GenModel::BimodalRegCusp) {
    throw std::invalid_argument("gen_bimodal: model is not BimodalRegCusp");
  }
  return generate_regression(cfg, RootRule::CoinFlip);
}

Dataset gen_sdecusp(const GenConfig& cfg) {
  if (cfg.model != GenModel::SdeCusp) throw std::invalid_argument("gen_sdecusp: model is not SdeCusp");
  return generate_regression(cfg, RootRule::Stationary);
}

OlivaData gen_oliva(std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_oliva: n must be at least 2");
  OlivaData out;
  Dataset& d = out.data;
  d.features.resize(static_cast<Eigen::Index>(n), 7);
  d.response.resize(n);
  LatentTruth& latent = d.latent.emplace();
  latent.controls.resize(n);
  latent.noiseless_root.resize(n);
  latent.branch.resize(n);
  out.u1.resize(n);
  out.u2.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    Engine rng = row_stream(seed, i);
    std::uniform_real_distribution<double> ux(-2.0, 2.0);
    std::uniform_real_distribution<double> uy(-3.0, 3.0);
    double* f = d.features.data() + i * 7;
    for (int j = 0; j < 3; ++j) f[j] = ux(rng);
    for (int j = 3; j < 7; ++j) f[j] = uy(rng);
    const double u1 = uy(rng);

    const ControlParams p(f[0] - 0.969 * f[1] - 0.201 * f[2],
                          0.44 * f[3] + 0.08 * f[4] + 0.67 * f[5] + 0.19 * f[6]);
    const double z = sde_stationary_sample(p, rng);
    const RootSet set = solve_equilibrium(p);

    d.response[i] = z;
    latent.controls[i] = p;
    latent.noiseless_root[i] = delay_root(set, z);
    latent.branch[i] = branch_of(set, latent.noiseless_root[i]);
    out.u1[i] = u1;
    // Chosen so that z = -0.52*u1 - 1.60*u2.
    out.u2[i] = -(z + 0.52 * u1) / 1.60;
  }
  return out;
}

Dataset generate(const GenConfig& cfg) {
  switch (cfg.model) {
    case GenModel::RegCusp: return gen_regcusp(cfg);
    case GenModel::BimodalRegCusp: return gen_bimodal(cfg);
    case GenModel::SdeCusp: return gen_sdecusp(cfg);
    case GenModel::Oliva: return gen_oliva(cfg.n, cfg.seed).data;
  }
  throw std::invalid_argument("generate: unknown model");
}

}  // namespace cuspmdn
