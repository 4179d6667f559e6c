#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "eslab/landscape.hpp"
#include "eslab/random.hpp"

namespace eslab {

/// Denominator of the population reward variance used for z-scoring.
/// `population` divides by N (Σ Z_i² = N), `unbiased` by N − 1 (Σ Z_i² = N − 1).
enum class ZScoreDenominator { population, unbiased };

struct EsConfig {
  double sigma = 0.0;            // perturbation scale σ
  double alpha = 0.0;            // step size α
  std::size_t population = 0;    // N
  ZScoreDenominator zscore = ZScoreDenominator::population;
  std::uint64_t seed = 0;

  /// α = σ/2.
  static EsConfig with_default_step(double sigma, std::size_t population,
                                    std::uint64_t seed = 0);
  void validate() const;
};

struct GdConfig {
  double beta = 0.0;             // learning rate β
  std::size_t steps = 1;         // informational; callers pass T explicitly
  void validate() const;
};

/// Simplified ES iteration θ ← Hθ + η with H = I − (ασ/σ_R)Q frozen and
/// η ~ N(0, (α²/N) I).
struct OuConfig {
  double sigma_r_fixed = 0.0;
  double alpha = 0.0;
  double sigma = 0.0;
  std::size_t population = 0;
  /// Drops η (the N → ∞ limit); the iteration becomes gradient ascent with
  /// β = ασ/σ_R.
  bool noiseless = false;
  std::uint64_t seed = 0;

  double effective_rate() const { return alpha * sigma / sigma_r_fixed; }
  /// γ_k = 1 − (ασ/σ_R)·λ_k.
  double contraction(double eigenvalue) const { return 1.0 - effective_rate() * eigenvalue; }
  double noise_variance() const;
  void validate() const;
};

struct RewardMoments {
  double mean = 0.0;
  double std = 0.0;
};

RewardMoments reward_moments(std::span<const double> rewards, ZScoreDenominator denominator);

/// Z_i = (R_i − μ_R)/σ_R. Returns nullopt when every reward is identical.
std::optional<std::vector<double>> zscore(std::span<const double> rewards,
                                          ZScoreDenominator denominator);

struct StepDiagnostics {
  double reward_mean = 0.0;
  double reward_std = 0.0;
  double update_norm = 0.0;
  /// All N rewards were identical; the update was skipped.
  bool degenerate = false;
};

/// Scratch buffers for es_step; O(d) regardless of N.
class EsWorkspace {
 public:
  explicit EsWorkspace(std::size_t dimension);
  std::size_t dimension() const { return eps_.size(); }

 private:
  friend StepDiagnostics es_step_inplace(std::span<double>, const Landscape&, const NoiseModel&,
                                         const EsConfig&, Rng&, EsWorkspace&);
  Vector eps_;
  Vector probe_;
  Vector sum_reward_eps_;
  Vector sum_eps_;
  std::vector<double> rewards_;
};

/// One z-scored ES update, θ ← θ + (α/N) Σ Z_i ε_i.
///
/// Perturbations are consumed as they are drawn: the update is accumulated as
/// Σ (R_i − R_1) ε_i and Σ ε_i, which the z-score statistics then combine, so
/// no more than one ε_i is alive at a time. Draw order per member i is ε_i
/// (d normals) followed by ξ_i when σ_ξ > 0.
StepDiagnostics es_step_inplace(std::span<double> theta, const Landscape& landscape,
                                const NoiseModel& noise, const EsConfig& cfg, Rng& rng,
                                EsWorkspace& workspace);

struct EsStep {
  Vector theta;
  StepDiagnostics diagnostics;
};

EsStep es_step(std::span<const double> theta, const Landscape& landscape,
               const NoiseModel& noise, const EsConfig& cfg, Rng& rng);

/// Gradient ascent on the reward: θ ← θ + β ∇R(θ).
void gd_step_inplace(std::span<double> theta, const Landscape& landscape, const GdConfig& cfg);
Vector gd_step(std::span<const double> theta, const Landscape& landscape, const GdConfig& cfg);

void ou_step_inplace(std::span<double> theta, const OuConfig& cfg,
                     const QuadraticLandscape& spectrum, Rng& rng);
Vector ou_step(std::span<const double> theta, const OuConfig& cfg,
               const QuadraticLandscape& spectrum, Rng& rng);

}  // namespace eslab
