#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "eslab/optimizer.hpp"
#include "eslab/theory.hpp"
#include "oracles.hpp"

using eslab::Vector;

namespace {

Vector linear_spaced(std::size_t d, double lo, double hi) {
  Vector out(d);
  for (std::size_t i = 0; i < d; ++i) out[i] = lo + (hi - lo) * double(i) / double(d - 1);
  return out;
}

void expect_close(const Vector& a, const Vector& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], tol) << "index " << i;
}

}  // namespace

TEST(EsConfig, DefaultStepIsHalfSigma) {
  const auto cfg = eslab::EsConfig::with_default_step(0.02, 30, 1);
  EXPECT_DOUBLE_EQ(cfg.alpha, 0.01);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(EsConfig, RejectsBadParameters) {
  eslab::EsConfig cfg{0.1, 0.05, 1};
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.population = 10;
  cfg.sigma = 0.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg.sigma = 0.1;
  cfg.alpha = -1.0;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
}

TEST(Zscore, SquaresSumToPopulationOrNMinusOne) {
  const Vector r{1.0, 4.0, -2.0, 0.5, 3.0, 3.0, 7.5};
  const auto pop = eslab::zscore(r, eslab::ZScoreDenominator::population);
  const auto unb = eslab::zscore(r, eslab::ZScoreDenominator::unbiased);
  ASSERT_TRUE(pop && unb);
  double sp = 0.0, su = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    sp += (*pop)[i] * (*pop)[i];
    su += (*unb)[i] * (*unb)[i];
    mean += (*pop)[i];
  }
  EXPECT_NEAR(sp, 7.0, 1e-12);
  EXPECT_NEAR(su, 6.0, 1e-12);
  EXPECT_NEAR(mean, 0.0, 1e-12);
}

TEST(Zscore, IdenticalRewardsAreDegenerate) {
  EXPECT_FALSE(eslab::zscore(Vector(5, 2.0), eslab::ZScoreDenominator::population));
}

TEST(EsStep, FlatNoiselessLeavesThetaUnchanged) {
  eslab::Landscape flat(eslab::FlatLandscape(10, 3.0));
  const Vector theta = linear_spaced(10, -1, 1);
  eslab::Rng rng(1);
  const auto step = eslab::es_step(theta, flat, {0.0}, {0.1, 0.05, 30}, rng);
  EXPECT_TRUE(step.diagnostics.degenerate);
  EXPECT_EQ(step.theta, theta);
  EXPECT_EQ(step.diagnostics.update_norm, 0.0);
}

TEST(EsStep, WrongDimensionThrows) {
  eslab::Landscape flat(eslab::FlatLandscape(4));
  eslab::Rng rng(1);
  EXPECT_THROW(eslab::es_step(Vector(3, 0.0), flat, {1.0}, {0.1, 0.05, 4}, rng),
               eslab::DimensionError);
}

// The streaming update has to agree with the naive "store every ε, z-score,
// sum" implementation when both consume the same random stream.
TEST(EsStep, MatchesNaiveImplementationOnEveryLandscape) {
  const std::size_t d = 12;
  const Vector theta = linear_spaced(d, -0.7, 0.9);
  const eslab::Landscape landscapes[] = {
      eslab::FlatLandscape(d, 1.0),
      eslab::LinearLandscape(linear_spaced(d, 0.5, -0.25)),
      eslab::QuadraticLandscape(linear_spaced(d, 0.0, 3.0)),
      eslab::QuadraticLandscape(linear_spaced(d, -1.0, 2.0), 8),
  };
  for (const auto denom : {eslab::ZScoreDenominator::population, eslab::ZScoreDenominator::unbiased}) {
    for (const auto& landscape : landscapes) {
      for (const double sigma_xi : {0.0, 0.3}) {
        if (landscape.kind() == eslab::LandscapeKind::flat && sigma_xi == 0.0) continue;
        eslab::EsConfig cfg{0.05, 0.02, 17, denom, 0};
        eslab::Rng a(123), b(123);
        const auto fast = eslab::es_step(theta, landscape, {sigma_xi}, cfg, a);
        const Vector slow = oracle::naive_es_step(
            theta, [&](const Vector& t) { return landscape.reward(t); }, sigma_xi, cfg, b);
        expect_close(fast.theta, slow, 1e-13);
        EXPECT_EQ(a.next_u64(), b.next_u64());
      }
    }
  }
}

TEST(EsStep, InplaceMatchesOutOfPlace) {
  eslab::Landscape lin(eslab::LinearLandscape(Vector(6, 1.0)));
  Vector theta(6, 0.25);
  eslab::Rng a(9), b(9);
  eslab::EsWorkspace ws(6);
  const eslab::EsConfig cfg{0.1, 0.05, 8};
  const auto out = eslab::es_step(theta, lin, {0.1}, cfg, a);
  eslab::es_step_inplace(theta, lin, {0.1}, cfg, b, ws);
  EXPECT_EQ(theta, out.theta);
}

// Flat landscape: each update coordinate has variance α²/N and the
// coordinates are uncorrelated, exactly, for sample z-scores.
TEST(EsStepMonteCarlo, FlatUpdateCovarianceIsIsotropic) {
  const std::size_t d = 50, n = 30, steps = 100000;
  const double alpha = 0.01;
  eslab::Landscape flat{eslab::FlatLandscape(d)};
  eslab::EsConfig cfg{0.02, alpha, n};
  eslab::Rng rng(20240601);
  eslab::EsWorkspace ws(d);
  oracle::CovarianceAccumulator acc(Vector(d, 0.0));
  Vector theta(d);
  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(theta.begin(), theta.end(), 0.0);
    eslab::es_step_inplace(theta, flat, {1.0}, cfg, rng, ws);
    acc.add(theta);
  }
  const double expected = eslab::theory::step_variance(alpha, n);
  for (std::size_t i = 0; i < d; ++i) {
    EXPECT_NEAR(acc.cov(i, i), expected, 3 * acc.cov_stderr(i, i)) << i;
    EXPECT_NEAR(acc.mean(i), 0.0, 3 * acc.mean_stderr(i)) << i;
  }
  // 1225 off-diagonal entries: judge the family rather than each one at 3 SE.
  double max_z = 0.0, sum_z2 = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      const double z = acc.cov(i, j) / acc.cov_stderr(i, j);
      max_z = std::max(max_z, std::abs(z));
      sum_z2 += z * z;
      ++count;
    }
  }
  EXPECT_LT(max_z, 4.5);
  EXPECT_NEAR(sum_z2 / double(count), 1.0, 0.15);
}

// Linear landscape with sample z-scores: the mean update is the population
// prediction scaled by the finite-N attenuation, and ρ follows the matching
// finite-N formula.
TEST(EsStepMonteCarlo, LinearMeanAndOnManifoldShare) {
  const std::size_t d = 20, n = 30, steps = 100000;
  const double sigma = 0.02, alpha = 0.01;
  Vector v(d);
  eslab::Rng vr(5);
  vr.fill_normal(v);
  const double vn = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  for (double& x : v) x /= vn;
  const double sigma_xi = sigma;  // s = 1/2
  eslab::Landscape lin{eslab::LinearLandscape(v)};
  eslab::EsConfig cfg{sigma, alpha, n};
  eslab::Rng rng(77);
  eslab::EsWorkspace ws(d);
  oracle::CovarianceAccumulator acc(Vector(d, 0.0));
  double on = 0.0, total = 0.0;
  Vector theta(d);
  for (std::size_t s = 0; s < steps; ++s) {
    std::fill(theta.begin(), theta.end(), 0.0);
    eslab::es_step_inplace(theta, lin, {sigma_xi}, cfg, rng, ws);
    acc.add(theta);
    const double p = std::inner_product(theta.begin(), theta.end(), v.begin(), 0.0);
    on += p * p;
    total += std::inner_product(theta.begin(), theta.end(), theta.begin(), 0.0);
  }
  const double sigma_r = eslab::theory::sigma_r_linear(sigma, 1.0, sigma_xi);
  const double atten =
      eslab::theory::zscore_mean_attenuation(n, eslab::ZScoreDenominator::population);
  for (std::size_t i = 0; i < d; ++i) {
    const double predicted = -atten * alpha * sigma * v[i] / sigma_r;
    EXPECT_NEAR(acc.mean(i), predicted, 3 * acc.mean_stderr(i)) << i;
  }
  const double s_frac = eslab::theory::signal_fraction(sigma, 1.0, sigma_xi);
  EXPECT_NEAR(on / total, eslab::theory::rho_linear_sample_zscore(s_frac, n, d),
              0.02 * eslab::theory::rho_linear_sample_zscore(s_frac, n, d));
}

// Quadratic landscape: with exact reward moments the closed-form mean and
// covariance hold. This checks the formulas, not the sample z-scoring.
TEST(EsStepMonteCarlo, QuadraticMomentsWithPopulationZscore) {
  const std::size_t d = 10, n = 30, steps = 1000000;
  const double sigma = 0.1, alpha = 0.05;
  Vector eig(d);
  eslab::Rng er(31);
  for (double& l : eig) l = 2.0 * std::ldexp(double(er.next_u64() >> 11), -53);
  const eslab::QuadraticLandscape q(eig);
  const Vector theta = linear_spaced(d, -1.0, 1.0);
  const Vector v = q.apply_q(theta);
  const double vn = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  const double sigma_r = eslab::theory::sigma_r_quadratic(sigma, vn, q.trace_q2(), 0.0);
  const double trace = std::accumulate(eig.begin(), eig.end(), 0.0);
  const double reward_mean = q.reward(theta) - 0.5 * sigma * sigma * trace;

  const auto m = eslab::theory::es_step_moments(eslab::LandscapeKind::quadratic, v, eig, sigma,
                                                alpha, n, 0.0);
  const Vector cov = eslab::theory::dense_covariance(m, eig);
  oracle::CovarianceAccumulator acc(m.mean);
  eslab::Rng rng(4242);
  Vector zero(d, 0.0);
  for (std::size_t s = 0; s < steps; ++s) {
    const Vector next = oracle::population_moment_es_step(
        theta, [&](const Vector& t) { return q.reward(t); }, reward_mean, sigma_r, 0.0, sigma,
        alpha, n, rng);
    for (std::size_t i = 0; i < d; ++i) zero[i] = next[i] - theta[i];
    acc.add(zero);
  }
  for (std::size_t i = 0; i < d; ++i) {
    EXPECT_NEAR(acc.mean(i), m.mean[i], 3 * acc.mean_stderr(i)) << i;
    EXPECT_NEAR(acc.cov(i, i), cov[i * d + i], 3 * acc.cov_stderr(i, i)) << i;
  }
  double max_z = 0.0;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = i + 1; j < d; ++j)
      max_z = std::max(max_z, std::abs(acc.cov(i, j) - cov[i * d + j]) / acc.cov_stderr(i, j));
  EXPECT_LT(max_z, 4.0);
}

TEST(GdStep, QuadraticMatchesClosedFormStep) {
  eslab::Landscape q{eslab::QuadraticLandscape({0.0, 1.0, 5.0})};
  const Vector theta{1.0, 2.0, -1.0};
  const Vector next = eslab::gd_step(theta, q, {0.1});
  EXPECT_EQ(next[0], 1.0);
  EXPECT_DOUBLE_EQ(next[1], 1.8);
  EXPECT_DOUBLE_EQ(next[2], -0.5);
}

TEST(GdStep, FlatAndLinear) {
  eslab::Landscape flat{eslab::FlatLandscape(3)};
  EXPECT_EQ(eslab::gd_step(Vector{1, 2, 3}, flat, {0.5}), (Vector{1, 2, 3}));
  eslab::Landscape lin{eslab::LinearLandscape({1.0, -1.0})};
  EXPECT_EQ(eslab::gd_step(Vector{0, 0}, lin, {0.5}), (Vector{-0.5, 0.5}));
  EXPECT_THROW(eslab::gd_step(Vector{0, 0}, lin, {0.0}), std::invalid_argument);
}

TEST(GdStep, RotatedMatchesDenseOracle) {
  eslab::QuadraticLandscape q({0.5, 0.0, 2.0, 1.0}, 21);
  const Eigen::MatrixXd dense = oracle::dense_q(q);
  const Vector theta{0.3, -0.2, 1.0, 0.7};
  const Vector next = eslab::gd_step(theta, eslab::Landscape(q), {0.2});
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(theta.data(), 4);
  const Eigen::VectorXd expect = t - 0.2 * dense * t;
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(next[i], expect[i], 1e-14);
}

TEST(OuStep, NoiselessIsContraction) {
  eslab::QuadraticLandscape q({0.0, 1.0, 10.0});
  eslab::OuConfig cfg{0.01, 0.05, 0.1, 30, true, 0};
  eslab::Rng rng(1);
  const Vector next = eslab::ou_step(Vector{2.0, 2.0, 2.0}, cfg, q, rng);
  EXPECT_EQ(next[0], 2.0);
  EXPECT_DOUBLE_EQ(next[1], 2.0 * cfg.contraction(1.0));
  EXPECT_DOUBLE_EQ(next[2], 2.0 * cfg.contraction(10.0));
  EXPECT_DOUBLE_EQ(cfg.contraction(10.0), 1.0 - 0.05 * 0.1 / 0.01 * 10.0);
}

TEST(OuStep, RotatedNoiselessMatchesDense) {
  eslab::QuadraticLandscape q({0.2, 1.0, 0.0}, 4);
  eslab::OuConfig cfg{0.5, 0.05, 0.1, 30, true, 0};
  eslab::Rng rng(1);
  const Vector theta{1.0, -1.0, 0.5};
  const Vector next = eslab::ou_step(theta, cfg, q, rng);
  const Eigen::VectorXd t = Eigen::Map<const Eigen::VectorXd>(theta.data(), 3);
  const Eigen::VectorXd expect = t - cfg.effective_rate() * oracle::dense_q(q) * t;
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(next[i], expect[i], 1e-14);
}

TEST(OuStep, NoiseVariancePerCoordinate) {
  eslab::QuadraticLandscape q(Vector(4, 0.0));
  eslab::OuConfig cfg{0.01, 0.05, 0.1, 30, false, 0};
  EXPECT_DOUBLE_EQ(cfg.noise_variance(), 0.05 * 0.05 / 30.0);
  eslab::Rng rng(3);
  const int n = 100000;
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    const Vector x = eslab::ou_step(Vector(4, 0.0), cfg, q, rng);
    ss += x[0] * x[0];
  }
  const double var = ss / n;
  EXPECT_NEAR(var, cfg.noise_variance(), 3 * cfg.noise_variance() * std::sqrt(2.0 / n));
}
