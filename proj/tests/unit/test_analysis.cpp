#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "eslab/analysis.hpp"
#include "eslab/theory.hpp"

using eslab::Vector;

TEST(DriftFit, ExactLineRecoversSlope) {
  Vector drift(101);
  for (std::size_t t = 0; t < drift.size(); ++t) drift[t] = 0.004 * double(t);
  const auto fit = eslab::fit_drift(drift, 0.01, 30, 1200);
  EXPECT_NEAR(fit.slope, 0.004, 1e-15);
  ASSERT_TRUE(fit.r_squared);
  EXPECT_NEAR(*fit.r_squared, 1.0, 1e-12);
  EXPECT_NEAR(fit.d_eff, 0.004 * 30 / 1e-4, 1e-9);
  EXPECT_NEAR(fit.d_eff_ratio, 1.0, 1e-12);
}

TEST(DriftFit, AllZeroCurveHasNoRSquared) {
  const auto fit = eslab::fit_drift(Vector(10, 0.0), 0.01, 30, 10);
  EXPECT_EQ(fit.slope, 0.0);
  EXPECT_FALSE(fit.r_squared);
}

TEST(DriftFit, ReferenceModelRatio) {
  const auto fit = eslab::drift_fit_from_slope(72.74, 7.5e-4, 30, 4022468096ULL);
  EXPECT_NEAR(fit.d_eff_ratio, 0.964, 0.001);
}

TEST(DriftFit, TooShortThrows) {
  EXPECT_THROW(eslab::fit_drift(Vector{0.0}, 0.01, 30, 10), std::invalid_argument);
}

TEST(ManifoldProjection, IsotropicUpdatesSplitByDimension) {
  const std::size_t d = 40, samples = 20000;
  Vector v(d, 0.0);
  v[3] = 2.0;
  eslab::ManifoldProjection proj = eslab::ManifoldProjection::along(v);
  eslab::Rng rng(1);
  Vector x(d);
  std::vector<double> per_sample;
  for (std::size_t s = 0; s < samples; ++s) {
    rng.fill_normal(x);
    proj.add(x);
  }
  // on-share is Σ x_3² / Σ ‖x‖²; its spread is about √(2/samples)/d.
  const double se = std::sqrt(2.0 / double(samples)) / double(d);
  EXPECT_NEAR(proj.on_fraction(), 1.0 / double(d), 3 * se);
  EXPECT_NEAR(proj.on_fraction() + proj.off_fraction(), 1.0, 1e-14);
}

TEST(ManifoldProjection, AxesAndBasisAgree) {
  auto axes = eslab::ManifoldProjection::onto_axes(4, {0, 2});
  Vector e0{1, 0, 0, 0}, e2{0, 0, 1, 0};
  auto basis = eslab::ManifoldProjection::onto({e0, e2});
  const Vector u{1.0, 2.0, 3.0, 4.0};
  EXPECT_DOUBLE_EQ(axes.on_sq(u), 10.0);
  EXPECT_DOUBLE_EQ(basis.on_sq(u), 10.0);
}

TEST(ManifoldProjection, StatsHelper) {
  const std::vector<Vector> updates{{1, 0}, {0, 1}, {1, 1}};
  const auto f = eslab::manifold_projection_stats(updates, Vector{1, 0});
  EXPECT_DOUBLE_EQ(f.on_fraction, 0.5);
  EXPECT_DOUBLE_EQ(f.off_fraction, 0.5);
}

TEST(Interpolation, ConcaveLandscapeHasNoBarrier) {
  eslab::Landscape q{eslab::QuadraticLandscape({1.0, 2.0, 0.0})};
  const auto path = eslab::interpolate_path(Vector{1, 1, 0}, Vector{-1, 0.5, 3}, q, 9);
  ASSERT_EQ(path.rewards.size(), 9u);
  EXPECT_EQ(path.mixing.front(), 0.0);
  EXPECT_EQ(path.mixing.back(), 1.0);
  EXPECT_EQ(path.barrier, 0.0);
  EXPECT_EQ(path.rewards.front(), q.reward(Vector{1, 1, 0}));
  EXPECT_EQ(path.rewards.back(), q.reward(Vector{-1, 0.5, 3}));
}

TEST(Interpolation, ConvexLandscapeShowsBarrier) {
  eslab::Landscape q{eslab::QuadraticLandscape({-1.0})};
  // R = ½θ²: endpoints at ±1 give ½, the midpoint 0.
  const auto path = eslab::interpolate_path(Vector{-1.0}, Vector{1.0}, q, 3);
  EXPECT_DOUBLE_EQ(path.barrier, 0.5);
}

TEST(Probe, CheckpointMagnitudeReproducesTrainedReward) {
  eslab::Landscape q{eslab::QuadraticLandscape({0.3, 1.7, 0.0}, 6)};
  const Vector base{0.1, 0.2, 0.3}, trained{0.7, -1.1, 0.05};
  Vector delta(3);
  for (int i = 0; i < 3; ++i) delta[i] = trained[i] - base[i];
  const double norm = std::sqrt(std::inner_product(delta.begin(), delta.end(), delta.begin(), 0.0));
  const Vector mags{0.0, 0.5 * norm, norm, 2.0 * norm};
  const auto probe = eslab::checkpoint_probe(base, trained, q, mags);
  EXPECT_EQ(probe.rewards[0], q.reward(base));
  EXPECT_EQ(probe.rewards[2], q.reward(trained));
  EXPECT_EQ(probe.direction_label, "trained");
}

TEST(Probe, RandomDirectionsAreLabelledAndUnit) {
  eslab::Landscape flat{eslab::FlatLandscape(5, 2.0)};
  const Vector mags{0.0, 1.0};
  const std::vector<std::uint64_t> seeds{4, 9};
  const auto probes = eslab::random_direction_probe(Vector(5, 0.0), flat, mags, seeds);
  ASSERT_EQ(probes.size(), 2u);
  EXPECT_EQ(probes[1].direction_label, "random[9]");
  eslab::Rng rng(3);
  const Vector u = eslab::random_unit_direction(7, rng);
  EXPECT_NEAR(std::inner_product(u.begin(), u.end(), u.begin(), 0.0), 1.0, 1e-14);
}

TEST(Ensemble, MeanAndStderrAcrossTrials) {
  eslab::TrajectoryRecord a, b;
  a.steps = b.steps = a.steps_completed = b.steps_completed = 1;
  a.drift = {0.0, 1.0};
  b.drift = {0.0, 3.0};
  a.directions = b.directions = {0};
  a.projection_steps = b.projection_steps = {0, 1};
  a.projections = {{1.0, 2.0}};
  b.projections = {{1.0, 4.0}};
  const std::vector<eslab::TrajectoryRecord> recs{a, b};
  const auto stats = eslab::ensemble_stats(recs);
  EXPECT_EQ(stats.trials, 2u);
  EXPECT_DOUBLE_EQ(stats.mean_drift[1], 2.0);
  EXPECT_DOUBLE_EQ(stats.stderr_drift[1], 1.0);
  EXPECT_DOUBLE_EQ(stats.projection_mean[0][1], 3.0);
  EXPECT_DOUBLE_EQ(stats.projection_var[0][1], 2.0);
  EXPECT_THROW(eslab::ensemble_stats(std::span<const eslab::TrajectoryRecord>{}),
               std::invalid_argument);
}

TEST(Hierarchy, FlatLandscapeHasNoGdMotion) {
  eslab::Landscape flat{eslab::FlatLandscape(20)};
  eslab::HierarchyOptions opt{50, 4, 1, 1, false};
  const auto h = eslab::hierarchy_measurement(Vector(20, 0.5), flat, {1.0},
                                              eslab::EsConfig{0.1, 0.05, 30}, {0.5}, opt);
  EXPECT_EQ(h.gd_sq, 0.0);
  EXPECT_TRUE(h.cosine_samples.empty());
  EXPECT_EQ(h.es_sq.size(), 4u);
  // With GD frozen, ‖ES − GD‖² is the ES drift.
  for (std::size_t k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(h.diff_sq[k], h.es_sq[k]);
}

TEST(Hierarchy, GdDivergenceIsReported) {
  eslab::Landscape q{eslab::QuadraticLandscape({30.0, 0.0})};
  eslab::HierarchyOptions opt{500, 2, 1, 1, false};
  const auto h = eslab::hierarchy_measurement(Vector{1.0, 0.0}, q, {},
                                              eslab::EsConfig{0.1, 0.05, 30}, {0.1}, opt);
  EXPECT_TRUE(h.gd_diverged);
}
