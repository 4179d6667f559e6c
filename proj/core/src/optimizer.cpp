#include "eslab/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eslab {
namespace {

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

EsConfig EsConfig::with_default_step(double sigma, std::size_t population, std::uint64_t seed) {
  EsConfig cfg;
  cfg.sigma = sigma;
  cfg.alpha = sigma / 2.0;
  cfg.population = population;
  cfg.seed = seed;
  return cfg;
}

void EsConfig::validate() const {
  if (!positive_finite(sigma)) throw std::invalid_argument("es: sigma must be positive");
  if (!positive_finite(alpha)) throw std::invalid_argument("es: alpha must be positive");
  if (population < 2) throw std::invalid_argument("es: population must be at least 2");
}

void GdConfig::validate() const {
  if (!positive_finite(beta)) throw std::invalid_argument("gd: beta must be positive");
}

double OuConfig::noise_variance() const {
  return noiseless ? 0.0 : alpha * alpha / static_cast<double>(population);
}

void OuConfig::validate() const {
  if (!positive_finite(sigma_r_fixed)) throw std::invalid_argument("ou: sigma_r_fixed must be positive");
  if (!positive_finite(sigma)) throw std::invalid_argument("ou: sigma must be positive");
  if (!positive_finite(alpha)) throw std::invalid_argument("ou: alpha must be positive");
  if (!noiseless && population == 0) throw std::invalid_argument("ou: population must be positive");
}

RewardMoments reward_moments(std::span<const double> rewards, ZScoreDenominator denominator) {
  const std::size_t n = rewards.size();
  if (n < 2) throw std::invalid_argument("reward moments need at least two samples");
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double div = denominator == ZScoreDenominator::population ? static_cast<double>(n)
                                                                   : static_cast<double>(n - 1);
  return {mean, std::sqrt(ss / div)};
}

std::optional<std::vector<double>> zscore(std::span<const double> rewards,
                                          ZScoreDenominator denominator) {
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  if (rewards.size() < 2 || *lo == *hi) return std::nullopt;
  const RewardMoments m = reward_moments(rewards, denominator);
  std::vector<double> z(rewards.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = (rewards[i] - m.mean) / m.std;
  return z;
}

EsWorkspace::EsWorkspace(std::size_t dimension)
    : eps_(dimension), probe_(dimension), sum_reward_eps_(dimension), sum_eps_(dimension) {}

StepDiagnostics es_step_inplace(std::span<double> theta, const Landscape& landscape,
                                const NoiseModel& noise, const EsConfig& cfg, Rng& rng,
                                EsWorkspace& ws) {
  cfg.validate();
  const std::size_t d = landscape.dimension();
  check_dimension(d, theta.size());
  check_dimension(d, ws.dimension());

  const std::size_t n = cfg.population;
  ws.rewards_.resize(n);
  std::fill(ws.sum_reward_eps_.begin(), ws.sum_reward_eps_.end(), 0.0);
  std::fill(ws.sum_eps_.begin(), ws.sum_eps_.end(), 0.0);

  // Rewards are taken relative to the first member so that a large common
  // offset does not swamp the accumulated products.
  double reference = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rng.fill_normal(ws.eps_);
    for (std::size_t j = 0; j < d; ++j) ws.probe_[j] = theta[j] + cfg.sigma * ws.eps_[j];
    const double r = observe_reward(landscape, noise, ws.probe_, rng);
    ws.rewards_[i] = r;
    if (i == 0) reference = r;
    const double centred = r - reference;
    for (std::size_t j = 0; j < d; ++j) {
      ws.sum_reward_eps_[j] += centred * ws.eps_[j];
      ws.sum_eps_[j] += ws.eps_[j];
    }
  }

  StepDiagnostics diag;
  const RewardMoments m = reward_moments(ws.rewards_, cfg.zscore);
  diag.reward_mean = m.mean;
  diag.reward_std = m.std;

  const auto [lo, hi] = std::minmax_element(ws.rewards_.begin(), ws.rewards_.end());
  if (*lo == *hi || !(m.std > 0.0)) {
    diag.degenerate = true;
    diag.reward_std = 0.0;
    return diag;
  }

  // Σ Z_i ε_i = (1/σ_R) Σ (R_i − ref) ε_i + ((ref − μ_R)/σ_R) Σ ε_i.
  const double scale = cfg.alpha / static_cast<double>(n);
  const double a = scale / m.std;
  const double b = scale * (reference - m.mean) / m.std;
  double sq = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double delta = a * ws.sum_reward_eps_[j] + b * ws.sum_eps_[j];
    theta[j] += delta;
    sq += delta * delta;
  }
  diag.update_norm = std::sqrt(sq);
  return diag;
}

EsStep es_step(std::span<const double> theta, const Landscape& landscape,
               const NoiseModel& noise, const EsConfig& cfg, Rng& rng) {
  EsStep out{Vector(theta.begin(), theta.end()), {}};
  EsWorkspace ws(landscape.dimension());
  out.diagnostics = es_step_inplace(out.theta, landscape, noise, cfg, rng, ws);
  return out;
}

void gd_step_inplace(std::span<double> theta, const Landscape& landscape, const GdConfig& cfg) {
  cfg.validate();
  check_dimension(landscape.dimension(), theta.size());
  if (landscape.as_flat()) return;
  if (const auto* q = landscape.as_quadratic(); q && q->basis_mode() == BasisMode::canonical) {
    // Only active coordinates move; flat ones are left untouched bit for bit.
    for (std::size_t k : q->active_directions()) {
      theta[k] -= cfg.beta * q->eigenvalues()[k] * theta[k];
    }
    return;
  }
  const Vector g = landscape.gradient(theta);
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] += cfg.beta * g[i];
}

Vector gd_step(std::span<const double> theta, const Landscape& landscape, const GdConfig& cfg) {
  Vector out(theta.begin(), theta.end());
  gd_step_inplace(out, landscape, cfg);
  return out;
}

void ou_step_inplace(std::span<double> theta, const OuConfig& cfg,
                     const QuadraticLandscape& spectrum, Rng& rng) {
  cfg.validate();
  check_dimension(spectrum.dimension(), theta.size());
  if (spectrum.basis_mode() == BasisMode::canonical) {
    for (std::size_t k : spectrum.active_directions()) {
      theta[k] *= cfg.contraction(spectrum.eigenvalues()[k]);
    }
  } else {
    const Vector q_theta = spectrum.apply_q(theta);
    const double rate = cfg.effective_rate();
    for (std::size_t i = 0; i < theta.size(); ++i) theta[i] -= rate * q_theta[i];
  }
  if (cfg.noiseless) return;
  // Isotropic noise is rotation invariant, so it is drawn in the ambient basis.
  const double scale = std::sqrt(cfg.noise_variance());
  for (double& x : theta) x += scale * rng.normal();
}

Vector ou_step(std::span<const double> theta, const OuConfig& cfg,
               const QuadraticLandscape& spectrum, Rng& rng) {
  Vector out(theta.begin(), theta.end());
  ou_step_inplace(out, cfg, spectrum, rng);
  return out;
}

}  // namespace eslab
