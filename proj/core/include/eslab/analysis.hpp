#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eslab/landscape.hpp"
#include "eslab/optimizer.hpp"
#include "eslab/trajectory.hpp"

namespace eslab {

// --- ensembles ----------------------------------------------------------------

struct EnsembleStats {
  std::size_t trials = 0;
  std::vector<double> mean_drift;
  std::vector<double> stderr_drift;
  std::vector<std::size_t> directions;
  std::vector<std::size_t> projection_steps;
  /// Indexed [direction slot][projection step]; variance uses N − 1.
  std::vector<std::vector<double>> projection_mean;
  std::vector<std::vector<double>> projection_var;
};

/// Pointwise mean and standard error across trials. All records must share
/// the same completed length and record spec; reduction runs in trial order.
EnsembleStats ensemble_stats(std::span<const TrajectoryRecord> records);

struct PooledProjection {
  std::vector<std::size_t> steps;
  std::vector<double> mean;
  std::vector<double> variance;
  std::size_t samples = 0;  // trials × pooled directions
};

/// Treats the recorded directions in `slots` as exchangeable (same eigenvalue
/// and same starting projection) and pools them into one sample.
PooledProjection pooled_projection(std::span<const TrajectoryRecord> records,
                                   std::span<const std::size_t> slots);

// --- drift regression ---------------------------------------------------------

struct DriftFit {
  double slope = 0.0;
  /// Centred R² of the no-intercept fit; empty when the curve is all zero.
  std::optional<double> r_squared;
  double d_eff = 0.0;
  double d_eff_ratio = 0.0;
};

/// Least squares y_t ≈ s·t through the origin, t = 1..T (t = 0 is dropped).
DriftFit fit_drift(std::span<const double> drift, double alpha, std::size_t population,
                   std::size_t dimension);
DriftFit drift_fit_from_slope(double slope, double alpha, std::size_t population,
                              std::size_t dimension);

// --- manifold projection ------------------------------------------------------

/// Accumulates ‖PΔθ‖² and ‖Δθ‖² over update samples, where P projects on a
/// fixed subspace given by orthonormal columns.
class ManifoldProjection {
 public:
  /// The line through v; v is normalised.
  static ManifoldProjection along(std::span<const double> v);
  /// Span of orthonormal vectors.
  static ManifoldProjection onto(std::vector<Vector> orthonormal_basis);
  /// Canonical axes listed in `indices` (for example the active directions).
  static ManifoldProjection onto_axes(std::size_t dimension, std::vector<std::size_t> indices);

  void add(std::span<const double> update);
  /// ‖PΔθ‖² for one update, without accumulating.
  double on_sq(std::span<const double> update) const;

  std::size_t samples() const { return samples_; }
  double on_sq_sum() const { return on_sq_sum_; }
  double total_sq_sum() const { return total_sq_sum_; }
  double on_fraction() const;
  double off_fraction() const;

 private:
  std::size_t dimension_ = 0;
  std::vector<Vector> basis_;
  std::vector<std::size_t> axes_;
  std::size_t samples_ = 0;
  double on_sq_sum_ = 0.0;
  double total_sq_sum_ = 0.0;
};

struct ManifoldFractions {
  double on_fraction = 0.0;
  double off_fraction = 0.0;
};

ManifoldFractions manifold_projection_stats(std::span<const Vector> updates,
                                            std::span<const double> v);

// --- interpolation and probes ---------------------------------------------------

struct InterpolationResult {
  std::vector<double> mixing;
  std::vector<double> rewards;
  /// max over the path of min(R(A), R(B)) − R(θ(a)), never negative.
  double barrier = 0.0;
};

/// Exact rewards along (1 − a)θ_A + aθ_B at `points` evenly spaced a.
InterpolationResult interpolate_path(std::span<const double> theta_a,
                                     std::span<const double> theta_b, const Landscape& landscape,
                                     std::size_t points);

struct ProbeResult {
  std::vector<double> magnitudes;
  std::vector<double> rewards;
  std::string direction_label;
};

/// Exact rewards at θ_base + m·δ/‖δ‖. A magnitude equal to ‖δ‖ is evaluated
/// at θ_base + δ.
ProbeResult directional_probe(std::span<const double> theta_base, std::span<const double> delta,
                              const Landscape& landscape, std::span<const double> magnitudes,
                              std::string label = "delta");

/// Probe along θ_trained − θ_base. The magnitude ‖θ_trained − θ_base‖ is
/// evaluated at θ_trained itself, so it reproduces that reward bit for bit.
ProbeResult checkpoint_probe(std::span<const double> theta_base,
                             std::span<const double> theta_trained, const Landscape& landscape,
                             std::span<const double> magnitudes, std::string label = "trained");

/// Uniform on the unit sphere (normalised Gaussian).
Vector random_unit_direction(std::size_t dimension, Rng& rng);

/// One probe per seed along a random unit direction, labelled "random[seed]".
std::vector<ProbeResult> random_direction_probe(std::span<const double> theta_base,
                                                const Landscape& landscape,
                                                std::span<const double> magnitudes,
                                                std::span<const std::uint64_t> seeds);

// --- displacement hierarchy ---------------------------------------------------

struct HierarchyOptions {
  std::size_t steps = 0;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::size_t threads = 1;
  bool keep_endpoints = false;
};

struct HierarchyMeasurement {
  Vector gd_endpoint;
  double gd_sq = 0.0;
  std::vector<double> es_sq;        // per kept trial
  std::vector<double> diff_sq;      // per kept trial
  /// Empty when the GD displacement is zero and the cosine is undefined.
  std::vector<double> cosine_samples;
  double es_sq_mean = 0.0;
  double diff_sq_mean = 0.0;
  std::size_t excluded_diverged = 0;
  bool gd_diverged = false;
  std::vector<Vector> es_endpoints;  // filled when keep_endpoints is set
};

/// Runs GD once and ES over `trials` independent seeds from the same θ₀.
HierarchyMeasurement hierarchy_measurement(std::span<const double> theta0,
                                           const Landscape& landscape, const NoiseModel& noise,
                                           const EsConfig& es, const GdConfig& gd,
                                           const HierarchyOptions& options);

}  // namespace eslab
