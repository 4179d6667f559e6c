#pragma once

// Closed-form predictions for ES and GD on flat, linear and quadratic
// landscapes. Every function is pure and works on scalars or spectra only.
//
// Vectors called `v`, `theta0` or `coords` are expressed in the eigenbasis of
// Q (for the canonical basis that is the ordinary coordinate system).

#include <cstddef>
#include <span>
#include <vector>

#include "eslab/landscape.hpp"
#include "eslab/optimizer.hpp"

namespace eslab::theory {

/// Tolerance on |γ² − 1| below which the variance series is treated as a
/// pure random walk.
inline constexpr double kUnitRootTolerance = 1e-12;

// --- flat -------------------------------------------------------------------

/// Expected squared drift α²Td/N.
double flat_drift(double alpha, std::size_t steps, std::size_t dimension, std::size_t population);
/// Per-step growth α²d/N.
double flat_drift_slope(double alpha, std::size_t dimension, std::size_t population);
/// Per-coordinate variance of one update, α²/N.
double step_variance(double alpha, std::size_t population);

// --- linear -----------------------------------------------------------------

double sigma_r_linear(double sigma, double v_norm, double sigma_xi);
/// s = σ²‖v‖²/(σ²‖v‖² + σ_ξ²).
double signal_fraction(double sigma, double v_norm, double sigma_xi);
/// On-manifold share of the squared update, (1 + (N+1)s)/(d + (N+1)s).
double rho_linear(double s, std::size_t population, std::size_t dimension);

// --- quadratic --------------------------------------------------------------

/// √(σ²‖v‖² + (σ⁴/2)Tr Q² + σ_ξ²).
double sigma_r_quadratic(double sigma, double v_norm, double trace_q2, double sigma_xi);

/// Mean and structured covariance of a single ES update:
///   Cov = isotropic_coeff·I + rank1_coeff·v vᵀ + spectrum_coeff·Q².
struct StepMoments {
  std::vector<double> mean;
  double isotropic_coeff = 0.0;
  std::vector<double> rank1_direction;  // v itself, not normalised
  double rank1_coeff = 0.0;
  double spectrum_coeff = 0.0;
  double sigma_r = 0.0;
  /// Flat landscape without observation noise: every update is zero.
  bool degenerate = false;
};

/// For the quadratic kind, `v` is Qθ₀ and `eigenvalues` the spectrum of Q;
/// `eigenvalues` is ignored otherwise.
StepMoments es_step_moments(LandscapeKind kind, std::span<const double> v,
                            std::span<const double> eigenvalues, double sigma, double alpha,
                            std::size_t population, double sigma_xi);

/// Row-major dense covariance of `m` (small d only).
std::vector<double> dense_covariance(const StepMoments& m, std::span<const double> eigenvalues);

/// On-manifold share along v̂ on a quadratic landscape.
double rho_quadratic(std::span<const double> v, std::span<const double> eigenvalues, double sigma,
                     std::size_t population, double sigma_xi);

// --- finite population --------------------------------------------------------
//
// The formulas above treat the z-score moments as population values. With
// sample moments from N draws, and Gaussian rewards, both the mean update and
// the on-manifold share pick up closed-form finite-N corrections.

/// E[(1/N) Σ Z_i ε_i]·σ_R/(−σv) for Gaussian rewards, i.e. the factor that
/// multiplies −ασv/σ_R. Tends to 1 as N grows.
double zscore_mean_attenuation(std::size_t population, ZScoreDenominator denominator);

/// ρ for sample z-scores on a linear landscape, (1 + (N−2)s)/(d + (N−2)s).
double rho_linear_sample_zscore(double s, std::size_t population, std::size_t dimension);

// --- OU dynamics --------------------------------------------------------------

double ou_projected_mean(double theta0_proj, double gamma, std::size_t t);
/// (α²/N)(1 − γ^{2t})/(1 − γ²), or (α²/N)·t on the unit root.
double ou_projected_variance(double alpha, std::size_t population, double gamma, std::size_t t);
/// (α²/N)/(1 − γ²). Throws for |γ| ≥ 1.
double ou_asymptotic_variance(double alpha, std::size_t population, double gamma);
/// −log 2 / log γ². Throws for |γ| ≥ 1.
double convergence_timescale(double gamma);

// --- GD dynamics --------------------------------------------------------------

struct GdProjection {
  double value = 0.0;
  /// 0 < λ < 2/β.
  bool stable = false;
};

GdProjection gd_projected(double theta0_proj, double beta, double eigenvalue, std::size_t t);
/// |1 − βλ| > 1 or the marginal case βλ = 2: the projection does not settle.
bool gd_divergent(double beta, double eigenvalue);

// --- solution geometry --------------------------------------------------------

struct OuParameters {
  double alpha = 0.0;
  double sigma = 0.0;
  std::size_t population = 0;
  double sigma_r_fixed = 0.0;

  double contraction(double eigenvalue) const {
    return 1.0 - alpha * sigma / sigma_r_fixed * eigenvalue;
  }
};

struct DisplacementDecomposition {
  double signal_sq_norm = 0.0;
  double diffusion_sq_norm = 0.0;
  double total = 0.0;
};

DisplacementDecomposition displacement_decomposition(std::span<const double> theta0,
                                                     std::span<const double> eigenvalues,
                                                     const OuParameters& es, std::size_t steps);

struct HierarchyPrediction {
  double gd_sq_norm = 0.0;
  double es_sq_norm = 0.0;
  double es_gd_diff_sq_norm = 0.0;
  double expected_cosine_scale = 0.0;
};

/// α²T(d − r)/N.
double es_gd_difference(double alpha, std::size_t steps, std::size_t dimension, std::size_t rank,
                        std::size_t population);
/// √(r/d); a scale, not an expectation.
double expected_cosine_scale(std::size_t rank, std::size_t dimension);

HierarchyPrediction hierarchy_prediction(std::span<const double> theta0,
                                         std::span<const double> eigenvalues,
                                         const OuParameters& es, double beta, std::size_t steps);

// --- drift regression ---------------------------------------------------------

/// d_eff = sN/α².
double effective_dimension(double slope, std::size_t population, double alpha);

}  // namespace eslab::theory
