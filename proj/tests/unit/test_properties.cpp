// Randomised invariant checks. Each property draws its cases from a seeded
// generator so failures reproduce.

#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "eslab/analysis.hpp"
#include "eslab/theory.hpp"
#include "oracles.hpp"

using eslab::Vector;
namespace th = eslab::theory;

namespace {

constexpr int kCases = 200;

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * std::ldexp(double(rng_.next_u64() >> 11), -53);
  }
  std::size_t size(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng_.next_u64() % (hi - lo + 1));
  }
  Vector vec(std::size_t d, double lo, double hi) {
    Vector v(d);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }
  std::uint64_t seed() { return rng_.next_u64(); }

 private:
  eslab::Rng rng_;
};

}  // namespace

TEST(Property, ZscoreSquaresSumToN) {
  Gen g(1);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t n = g.size(2, 64);
    const Vector r = g.vec(n, -5.0, 5.0);
    const auto z = eslab::zscore(r, eslab::ZScoreDenominator::population);
    ASSERT_TRUE(z);
    const double ss = std::inner_product(z->begin(), z->end(), z->begin(), 0.0);
    EXPECT_NEAR(ss, double(n), 1e-10 * double(n));
  }
}

TEST(Property, StreamingStepMatchesNaive) {
  Gen g(2);
  for (int c = 0; c < 60; ++c) {
    const std::size_t d = g.size(1, 20);
    const Vector eig = g.vec(d, -1.0, 3.0);
    const bool rotate = g.uniform(0, 1) < 0.5;
    const eslab::Landscape land{rotate ? eslab::QuadraticLandscape(eig, g.seed())
                                       : eslab::QuadraticLandscape(eig)};
    const Vector theta = g.vec(d, -2.0, 2.0);
    const eslab::EsConfig cfg{g.uniform(0.01, 0.5), g.uniform(0.01, 0.2), g.size(2, 40)};
    const double xi = g.uniform(0, 1) < 0.5 ? 0.0 : g.uniform(0.01, 1.0);
    const std::uint64_t seed = g.seed();
    eslab::Rng a(seed), b(seed);
    const auto fast = eslab::es_step(theta, land, {xi}, cfg, a);
    const Vector slow = oracle::naive_es_step(
        theta, [&](const Vector& t) { return land.reward(t); }, xi, cfg, b);
    for (std::size_t i = 0; i < d; ++i) EXPECT_NEAR(fast.theta[i], slow[i], 1e-12);
  }
}

TEST(Property, RotatedLandscapeIsBasisInvariant) {
  Gen g(3);
  for (int c = 0; c < 50; ++c) {
    const std::size_t d = g.size(1, 16);
    const Vector eig = g.vec(d, -2.0, 2.0);
    const eslab::QuadraticLandscape canonical(eig), rotated(eig, g.seed());
    const Vector coords = g.vec(d, -3.0, 3.0);
    const Vector theta = rotated.from_eigenbasis(coords);
    EXPECT_NEAR(rotated.reward(theta), canonical.reward(coords),
                1e-12 * (1.0 + std::abs(canonical.reward(coords))));
    const Vector grad = rotated.gradient(theta);
    const Vector grad_coords = rotated.to_eigenbasis(grad);
    const Vector expect = canonical.gradient(coords);
    for (std::size_t k = 0; k < d; ++k) EXPECT_NEAR(grad_coords[k], expect[k], 1e-11);
  }
}

TEST(Property, RhoBoundedAndMonotoneInSignal) {
  Gen g(4);
  for (int c = 0; c < kCases; ++c) {
    const std::size_t d = g.size(1, 5000), n = g.size(2, 500);
    const double s1 = g.uniform(0, 1), s2 = g.uniform(0, 1);
    const double r1 = th::rho_linear(s1, n, d), r2 = th::rho_linear(s2, n, d);
    EXPECT_GE(r1, 1.0 / double(d) - 1e-15);
    EXPECT_LE(r1, 1.0 + 1e-15);
    if (s1 < s2) EXPECT_LE(r1, r2 + 1e-15);
    else EXPECT_GE(r1, r2 - 1e-15);
    // More samples concentrate the update on the signal direction.
    EXPECT_LE(r1, th::rho_linear(s1, n + 1, d) + 1e-15);
  }
}

TEST(Property, StepCovarianceIsPositiveSemidefinite) {
  Gen g(5);
  for (int c = 0; c < 50; ++c) {
    const std::size_t d = g.size(1, 12);
    const Vector eig = g.vec(d, -2.0, 2.0);
    const Vector v = g.vec(d, -1.0, 1.0);
    const auto m = th::es_step_moments(eslab::LandscapeKind::quadratic, v, eig,
                                       g.uniform(0.01, 1.0), g.uniform(0.01, 0.5), g.size(2, 100),
                                       g.uniform(0.0, 1.0));
    const Vector cov = th::dense_covariance(m, eig);
    Eigen::MatrixXd mat(d, d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) mat(i, j) = cov[i * d + j];
    EXPECT_LE((mat - mat.transpose()).norm(), 1e-14 * mat.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(mat);
    EXPECT_GE(solver.eigenvalues().minCoeff(), -1e-15 * mat.norm());
  }
}

TEST(Property, OuVarianceGrowsTowardStationary) {
  Gen g(6);
  for (int c = 0; c < kCases; ++c) {
    const double gamma = g.uniform(-0.999, 0.999);
    const double asym = th::ou_asymptotic_variance(0.05, 30, gamma);
    double prev = 0.0;
    for (std::size_t t = 0; t <= 300; t += 7) {
      const double var = th::ou_projected_variance(0.05, 30, gamma, t);
      EXPECT_GE(var, prev - 1e-18);
      EXPECT_LE(var, asym * (1.0 + 1e-12));
      prev = var;
    }
  }
}

TEST(Property, FitRecoversExactLines) {
  Gen g(7);
  for (int c = 0; c < kCases; ++c) {
    const double slope = g.uniform(1e-6, 10.0);
    Vector drift(g.size(2, 400));
    for (std::size_t t = 0; t < drift.size(); ++t) drift[t] = slope * double(t);
    const auto fit = eslab::fit_drift(drift, 0.01, 30, 100);
    EXPECT_NEAR(fit.slope / slope, 1.0, 1e-12);
    EXPECT_NEAR(*fit.r_squared, 1.0, 1e-10);
  }
}

TEST(Property, InterpolationIsSymmetricUnderSwap) {
  Gen g(8);
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = g.size(1, 10);
    const eslab::Landscape land{eslab::QuadraticLandscape(g.vec(d, -1.0, 2.0))};
    const Vector a = g.vec(d, -2, 2), b = g.vec(d, -2, 2);
    const std::size_t points = g.size(2, 15);
    const auto ab = eslab::interpolate_path(a, b, land, points);
    const auto ba = eslab::interpolate_path(b, a, land, points);
    for (std::size_t i = 0; i < points; ++i)
      EXPECT_EQ(ab.rewards[i], ba.rewards[points - 1 - i]);
    EXPECT_EQ(ab.barrier, ba.barrier);
    EXPECT_GE(ab.barrier, 0.0);
  }
}

TEST(Property, CheckpointProbeIsBitwiseAtTrainedPoint) {
  Gen g(9);
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = g.size(1, 12);
    const eslab::Landscape land{eslab::QuadraticLandscape(g.vec(d, -1.0, 2.0), g.seed())};
    const Vector base = g.vec(d, -1, 1), trained = g.vec(d, -1, 1);
    double norm = 0.0;
    for (std::size_t i = 0; i < d; ++i) norm += (trained[i] - base[i]) * (trained[i] - base[i]);
    const Vector mags{0.0, std::sqrt(norm)};
    const auto probe = eslab::checkpoint_probe(base, trained, land, mags);
    EXPECT_EQ(probe.rewards[1], land.reward(trained));
  }
}

TEST(Property, ManifoldFractionsSumToOne) {
  Gen g(10);
  for (int c = 0; c < 100; ++c) {
    const std::size_t d = g.size(2, 30);
    auto proj = eslab::ManifoldProjection::along(g.vec(d, -1, 1));
    for (int s = 0; s < 5; ++s) proj.add(g.vec(d, -1, 1));
    EXPECT_NEAR(proj.on_fraction() + proj.off_fraction(), 1.0, 1e-14);
    EXPECT_GE(proj.on_fraction(), 0.0);
  }
}

TEST(Property, TrajectoriesAreDeterministic) {
  Gen g(11);
  for (int c = 0; c < 20; ++c) {
    const std::size_t d = g.size(1, 10);
    const eslab::Landscape land{eslab::QuadraticLandscape(g.vec(d, 0.0, 1.0))};
    const Vector theta0 = g.vec(d, -1, 1);
    const eslab::EsConfig cfg{0.1, 0.05, g.size(2, 20), {}, g.seed()};
    const auto a = eslab::run_trajectory(theta0, land, {0.1}, cfg, 30, {{0}, 1, true});
    const auto b = eslab::run_trajectory(theta0, land, {0.1}, cfg, 30, {{0}, 1, true});
    EXPECT_EQ(a.drift, b.drift);
    EXPECT_EQ(a.final_theta, b.final_theta);
  }
}
