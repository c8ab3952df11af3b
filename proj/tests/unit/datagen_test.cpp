#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "cuspmdn/datagen.hpp"
#include "cuspmdn/presets.hpp"
#include "cuspmdn/sampler.hpp"
#include "oracles.hpp"

using namespace cuspmdn;

namespace {

GenConfig row1(GenModel model, std::size_t n, std::uint64_t seed, double noise = 1.0) {
  GenConfig g = presets::table1_config(0);
  g.model = model;
  g.n = n;
  g.seed = seed;
  g.noise_sd = noise;
  return g;
}

bool same(const Dataset& a, const Dataset& b) {
  return a.features == b.features && a.response == b.response;
}

}  // namespace

TEST(Controls, Examples) {
  const double x0[] = {0, 0};
  const double x1[] = {1, 0};
  const double x2[] = {1, 1};
  EXPECT_EQ(compute_controls(x0, {{1, 2, 3}, {4, 5, 6}}), ControlParams(1, 4));
  EXPECT_EQ(compute_controls(x1, {{0, 1, 0}, {0, 0, 1}}), ControlParams(1, 0));
  EXPECT_EQ(compute_controls(x2, {{1, 1, 1}, {2, 2, 2}}), ControlParams(3, 6));
}

TEST(Controls, RejectsLengthMismatch) {
  const double x[] = {1, 2, 3};
  EXPECT_THROW(compute_controls(x, {{1, 2, 3}, {4, 5, 6}}), std::invalid_argument);
}

TEST(Coeffs, RandomDrawsInRange) {
  const RegressionCoeffs c = random_coeffs(4, 12);
  ASSERT_EQ(c.a.size(), 5u);
  ASSERT_EQ(c.b.size(), 5u);
  for (double v : c.a) EXPECT_TRUE(v >= 0 && v < 5);
  for (double v : c.b) EXPECT_TRUE(v >= 0 && v < 5);
  EXPECT_EQ(random_coeffs(4, 12).a, c.a);
}

TEST(GenConfig, Validation) {
  GenConfig g = row1(GenModel::RegCusp, 1, 0);
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = row1(GenModel::RegCusp, 10, 0, -1.0);
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = row1(GenModel::RegCusp, 10, 0);
  g.coeffs.b.pop_back();
  EXPECT_THROW(g.validate(), std::invalid_argument);
  EXPECT_EQ(parse_gen_model("sde"), GenModel::SdeCusp);
  EXPECT_THROW(parse_gen_model("polycusp"), std::invalid_argument);
}

TEST(RegCusp, NoiselessResponseIsMaxwellRoot) {
  const Dataset d = gen_regcusp(row1(GenModel::RegCusp, 300, 5, 0.0));
  ASSERT_TRUE(d.latent);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    EXPECT_EQ(d.response[i], maxwell_root(d.latent->controls[i]));
    EXPECT_EQ(d.latent->noiseless_root[i], d.response[i]);
    EXPECT_EQ(d.latent->controls[i], compute_controls(d.row(i), presets::table1_config(0).coeffs));
  }
}

TEST(RegCusp, Deterministic) {
  EXPECT_TRUE(same(generate(row1(GenModel::RegCusp, 200, 42)),
                   generate(row1(GenModel::RegCusp, 200, 42))));
  EXPECT_FALSE(same(generate(row1(GenModel::RegCusp, 200, 42)),
                    generate(row1(GenModel::RegCusp, 200, 43))));
}

TEST(RegCusp, PrefixStableAcrossN) {
  // Rows draw from their own streams, so a longer dataset extends a shorter one.
  const Dataset a = generate(row1(GenModel::RegCusp, 50, 8));
  const Dataset b = generate(row1(GenModel::RegCusp, 80, 8));
  for (std::size_t i = 0; i < 50; ++i) EXPECT_EQ(a.response[i], b.response[i]);
}

TEST(RegCusp, NoiseCalibration) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset d = generate(row1(GenModel::RegCusp, 500, seed, 1.0));
    double mean = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) mean += d.response[i] - d.latent->noiseless_root[i];
    mean /= 500.0;
    double var = 0.0;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      const double e = d.response[i] - d.latent->noiseless_root[i] - mean;
      var += e * e;
    }
    var /= 499.0;
    EXPECT_GT(var, 0.85);
    EXPECT_LT(var, 1.15);
  }
}

TEST(RegCusp, FeatureScale) {
  const Dataset d = generate(row1(GenModel::RegCusp, 4000, 9));
  const double sd = std::sqrt(d.features.col(0).squaredNorm() / 4000.0);
  EXPECT_NEAR(sd, 2.0, 0.1);
}

TEST(Bimodal, MatchesRegCuspOutsideCusp) {
  const Dataset reg = generate(row1(GenModel::RegCusp, 400, 17));
  const Dataset bi = generate(row1(GenModel::BimodalRegCusp, 400, 17));
  EXPECT_EQ(reg.features, bi.features);
  std::size_t outside = 0;
  for (std::size_t i = 0; i < bi.rows(); ++i) {
    if (!bi.in_cusp_region(i)) {
      ++outside;
      EXPECT_EQ(bi.response[i], reg.response[i]);
      EXPECT_EQ(bi.latent->branch[i], Branch::Single);
    }
  }
  EXPECT_GT(outside, 0u);
}

TEST(Bimodal, NoiselessTakesAStableRoot) {
  const Dataset d = generate(row1(GenModel::BimodalRegCusp, 400, 3, 0.0));
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (!d.in_cusp_region(i)) continue;
    const RootSet r = solve_equilibrium(d.latent->controls[i]);
    ASSERT_EQ(r.size(), 3u);
    const Branch b = d.latent->branch[i];
    ASSERT_NE(b, Branch::Single);
    EXPECT_EQ(d.response[i], b == Branch::Lower ? r.root(0) : r.root(2));
  }
}

TEST(Bimodal, BranchBalance) {
  const Dataset d = generate(row1(GenModel::BimodalRegCusp, 8000, 21));
  double upper = 0;
  double cusp = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (!d.in_cusp_region(i)) continue;
    ++cusp;
    upper += d.latent->branch[i] == Branch::Upper;
  }
  ASSERT_GE(cusp, 2000);
  EXPECT_GE(upper / cusp, 0.47);
  EXPECT_LE(upper / cusp, 0.53);
  // Two-sided binomial test at level 0.01 (normal approximation).
  EXPECT_LT(std::abs(upper - cusp / 2) / std::sqrt(cusp / 4), 2.576);
}

TEST(Sde, Deterministic) {
  EXPECT_TRUE(same(generate(row1(GenModel::SdeCusp, 100, 4)),
                   generate(row1(GenModel::SdeCusp, 100, 4))));
}

TEST(Sde, ConcentratesForLargeDiscriminant) {
  GenConfig g = row1(GenModel::SdeCusp, 400, 6);
  g.coeffs = {{20, 3, 0}, {-2, 0, 0.5}};
  const Dataset d = generate(g);
  int checked = 0;
  int inside = 0;
  for (std::size_t i = 0; i < d.rows() && checked < 200; ++i) {
    const ControlParams p = d.latent->controls[i];
    if (cardan_discriminant(p) < 1000) continue;
    const double lo = maxwell_root(p) - 8;
    const double hi = maxwell_root(p) + 8;
    const double m = oracle::stationary_moment(p.alpha(), p.beta(), 1, lo, hi);
    const double s = std::sqrt(oracle::stationary_moment(p.alpha(), p.beta(), 2, lo, hi) - m * m);
    ++checked;
    inside += std::abs(d.response[i] - m) <= 3 * s;
  }
  ASSERT_GT(checked, 100);
  EXPECT_GE(inside, 0.95 * checked);
}

TEST(Sde, BimodalAtSymmetricControls) {
  GenConfig g = row1(GenModel::SdeCusp, 4000, 7);
  g.coeffs = {{0, 0, 0}, {6, 0, 0}};  // every row alpha = 0, beta = 6
  const Dataset d = generate(g);
  const double mass = oracle::stationary_mass(0, 6, 0, 8);
  EXPECT_NEAR(mass, 0.5, 1e-9);
  int positive = 0;
  for (double y : d.response) positive += y > 0;
  EXPECT_GE(positive, 0.3 * 4000);
  EXPECT_GE(4000 - positive, 0.3 * 4000);
}

TEST(Oliva, LinearIdentity) {
  const OlivaData o = gen_oliva(500, 2);
  ASSERT_EQ(o.data.cols(), 7u);
  for (std::size_t i = 0; i < o.data.rows(); ++i) {
    const double z = o.data.response[i];
    const double rebuilt = -0.52 * o.u1[i] - 1.60 * o.u2[i];
    EXPECT_LE(std::abs(rebuilt - z), 1e-12 * std::max(1.0, std::abs(z)));
  }
}

TEST(Oliva, ControlEquations) {
  const OlivaData o = gen_oliva(300, 3);
  for (std::size_t i = 0; i < o.data.rows(); ++i) {
    const auto x = o.data.row(i);
    EXPECT_TRUE(std::abs(x[0]) < 2 && std::abs(x[1]) < 2 && std::abs(x[2]) < 2);
    EXPECT_TRUE(std::abs(x[3]) < 3 && std::abs(x[6]) < 3);
    const ControlParams c = o.data.latent->controls[i];
    EXPECT_NEAR(c.alpha(), x[0] - 0.969 * x[1] - 0.201 * x[2], 1e-12);
    EXPECT_NEAR(c.beta(), 0.44 * x[3] + 0.08 * x[4] + 0.67 * x[5] + 0.19 * x[6], 1e-12);
  }
  EXPECT_EQ(compute_controls(std::vector<double>{1, 0, 0, 0, 0, 0, 0},
                             {{0, 1, -0.969, -0.201, 0, 0, 0, 0},
                              {0, 0, 0, 0, 0.44, 0.08, 0.67, 0.19}})
                .alpha(),
            1.0);
  EXPECT_THROW(gen_oliva(1, 0), std::invalid_argument);
}

TEST(Dataset, SubsetAndValidation) {
  const Dataset d = generate(row1(GenModel::BimodalRegCusp, 20, 1));
  const std::size_t pick[] = {3, 0, 7};
  const Dataset s = d.subset(pick);
  ASSERT_EQ(s.rows(), 3u);
  EXPECT_EQ(s.response[0], d.response[3]);
  EXPECT_EQ(s.latent->branch[2], d.latent->branch[7]);
  EXPECT_EQ(s.row(1)[1], d.row(0)[1]);
  Dataset bad = d;
  bad.response[2] = std::nan("");
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = d;
  bad.response.pop_back();
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Dataset, CuspFraction) {
  const Dataset d = generate(row1(GenModel::RegCusp, 500, 1));
  std::size_t inside = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    inside += cardan_discriminant(d.latent->controls[i]) < 0;
  }
  EXPECT_DOUBLE_EQ(cusp_fraction(d), inside / 500.0);
  Dataset bare = d;
  bare.latent.reset();
  EXPECT_EQ(cusp_fraction(bare), 0.0);
}
