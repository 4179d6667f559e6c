#include "eslab/analysis.hpp"

#include <cmath>
#include <stdexcept>

#include "eslab/parallel.hpp"

namespace eslab {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sq_distance(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void require_compatible(std::span<const TrajectoryRecord> records) {
  if (records.empty()) throw std::invalid_argument("ensemble needs at least one trajectory");
  const TrajectoryRecord& first = records.front();
  for (const TrajectoryRecord& r : records) {
    if (r.drift.size() != first.drift.size() || r.directions != first.directions ||
        r.projection_steps != first.projection_steps) {
      throw std::invalid_argument("trajectories differ in length or record spec");
    }
  }
}

}  // namespace

EnsembleStats ensemble_stats(std::span<const TrajectoryRecord> records) {
  require_compatible(records);
  const TrajectoryRecord& first = records.front();
  const double n = static_cast<double>(records.size());

  EnsembleStats out;
  out.trials = records.size();
  out.directions = first.directions;
  out.projection_steps = first.projection_steps;

  const std::size_t len = first.drift.size();
  out.mean_drift.assign(len, 0.0);
  out.stderr_drift.assign(len, 0.0);
  for (const TrajectoryRecord& r : records) {
    for (std::size_t t = 0; t < len; ++t) out.mean_drift[t] += r.drift[t];
  }
  for (double& m : out.mean_drift) m /= n;
  if (records.size() > 1) {
    for (std::size_t t = 0; t < len; ++t) {
      double ss = 0.0;
      for (const TrajectoryRecord& r : records) {
        const double dev = r.drift[t] - out.mean_drift[t];
        ss += dev * dev;
      }
      out.stderr_drift[t] = std::sqrt(ss / (n - 1.0) / n);
    }
  }

  const std::size_t dirs = first.directions.size();
  const std::size_t points = first.projection_steps.size();
  out.projection_mean.assign(dirs, std::vector<double>(points, 0.0));
  out.projection_var.assign(dirs, std::vector<double>(points, 0.0));
  for (std::size_t j = 0; j < dirs; ++j) {
    for (std::size_t i = 0; i < points; ++i) {
      double mean = 0.0;
      for (const TrajectoryRecord& r : records) mean += r.projections[j][i];
      mean /= n;
      double ss = 0.0;
      for (const TrajectoryRecord& r : records) {
        const double dev = r.projections[j][i] - mean;
        ss += dev * dev;
      }
      out.projection_mean[j][i] = mean;
      out.projection_var[j][i] = records.size() > 1 ? ss / (n - 1.0) : 0.0;
    }
  }
  return out;
}

PooledProjection pooled_projection(std::span<const TrajectoryRecord> records,
                                   std::span<const std::size_t> slots) {
  require_compatible(records);
  const TrajectoryRecord& first = records.front();
  for (std::size_t s : slots) {
    if (s >= first.directions.size()) throw std::out_of_range("direction slot out of range");
  }
  if (slots.empty()) throw std::invalid_argument("no directions to pool");

  PooledProjection out;
  out.steps = first.projection_steps;
  out.samples = records.size() * slots.size();
  const double n = static_cast<double>(out.samples);
  out.mean.assign(out.steps.size(), 0.0);
  out.variance.assign(out.steps.size(), 0.0);
  for (std::size_t i = 0; i < out.steps.size(); ++i) {
    double mean = 0.0;
    for (const TrajectoryRecord& r : records)
      for (std::size_t s : slots) mean += r.projections[s][i];
    mean /= n;
    double ss = 0.0;
    for (const TrajectoryRecord& r : records)
      for (std::size_t s : slots) {
        const double dev = r.projections[s][i] - mean;
        ss += dev * dev;
      }
    out.mean[i] = mean;
    out.variance[i] = out.samples > 1 ? ss / (n - 1.0) : 0.0;
  }
  return out;
}

DriftFit drift_fit_from_slope(double slope, double alpha, std::size_t population,
                              std::size_t dimension) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (population == 0 || dimension == 0) {
    throw std::invalid_argument("population and dimension must be positive");
  }
  DriftFit fit;
  fit.slope = slope;
  fit.d_eff = slope * static_cast<double>(population) / (alpha * alpha);
  fit.d_eff_ratio = fit.d_eff / static_cast<double>(dimension);
  return fit;
}

DriftFit fit_drift(std::span<const double> drift, double alpha, std::size_t population,
                   std::size_t dimension) {
  if (drift.size() < 2) throw std::invalid_argument("drift curve needs at least two points");
  double sty = 0.0;
  double stt = 0.0;
  double sy = 0.0;
  for (std::size_t t = 1; t < drift.size(); ++t) {
    const double x = static_cast<double>(t);
    sty += x * drift[t];
    stt += x * x;
    sy += drift[t];
  }
  DriftFit fit = drift_fit_from_slope(sty / stt, alpha, population, dimension);

  const double mean_y = sy / static_cast<double>(drift.size() - 1);
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t t = 1; t < drift.size(); ++t) {
    const double resid = drift[t] - fit.slope * static_cast<double>(t);
    const double dev = drift[t] - mean_y;
    ss_res += resid * resid;
    ss_tot += dev * dev;
  }
  if (ss_tot > 0.0) {
    fit.r_squared = 1.0 - ss_res / ss_tot;
  } else if (sy != 0.0) {
    // Constant nonzero curve: no spread to explain.
    fit.r_squared = ss_res == 0.0 ? 1.0 : 0.0;
  }
  return fit;
}

// --- manifold projection ------------------------------------------------------

ManifoldProjection ManifoldProjection::along(std::span<const double> v) {
  const double n = std::sqrt(dot(v, v));
  if (!(n > 0.0)) throw std::invalid_argument("projection direction must be nonzero");
  Vector unit(v.begin(), v.end());
  for (double& x : unit) x /= n;
  return onto({std::move(unit)});
}

ManifoldProjection ManifoldProjection::onto(std::vector<Vector> orthonormal_basis) {
  if (orthonormal_basis.empty()) throw std::invalid_argument("projection subspace is empty");
  ManifoldProjection p;
  p.dimension_ = orthonormal_basis.front().size();
  for (const Vector& u : orthonormal_basis) check_dimension(p.dimension_, u.size());
  p.basis_ = std::move(orthonormal_basis);
  return p;
}

ManifoldProjection ManifoldProjection::onto_axes(std::size_t dimension,
                                                 std::vector<std::size_t> indices) {
  if (indices.empty()) throw std::invalid_argument("projection subspace is empty");
  for (std::size_t k : indices) {
    if (k >= dimension) throw std::out_of_range("axis index out of range");
  }
  ManifoldProjection p;
  p.dimension_ = dimension;
  p.axes_ = std::move(indices);
  return p;
}

double ManifoldProjection::on_sq(std::span<const double> update) const {
  check_dimension(dimension_, update.size());
  double acc = 0.0;
  for (std::size_t k : axes_) acc += update[k] * update[k];
  for (const Vector& u : basis_) {
    const double c = dot(u, update);
    acc += c * c;
  }
  return acc;
}

void ManifoldProjection::add(std::span<const double> update) {
  on_sq_sum_ += on_sq(update);
  total_sq_sum_ += dot(update, update);
  ++samples_;
}

double ManifoldProjection::on_fraction() const {
  if (!(total_sq_sum_ > 0.0)) throw std::logic_error("no nonzero updates accumulated");
  return on_sq_sum_ / total_sq_sum_;
}

double ManifoldProjection::off_fraction() const { return 1.0 - on_fraction(); }

ManifoldFractions manifold_projection_stats(std::span<const Vector> updates,
                                            std::span<const double> v) {
  ManifoldProjection p = ManifoldProjection::along(v);
  for (const Vector& u : updates) p.add(u);
  return {p.on_fraction(), p.off_fraction()};
}

// --- interpolation and probes ---------------------------------------------------

InterpolationResult interpolate_path(std::span<const double> theta_a,
                                     std::span<const double> theta_b, const Landscape& landscape,
                                     std::size_t points) {
  const std::size_t d = landscape.dimension();
  check_dimension(d, theta_a.size());
  check_dimension(d, theta_b.size());
  if (points < 2) throw std::invalid_argument("interpolation needs at least two points");

  InterpolationResult out;
  out.mixing.resize(points);
  out.rewards.resize(points);
  const std::size_t last = points - 1;
  const double span = static_cast<double>(last);
  Vector mix(d);
  for (std::size_t i = 0; i < points; ++i) {
    out.mixing[i] = static_cast<double>(i) / span;
    if (i == 0) {
      out.rewards[i] = landscape.reward(theta_a);
    } else if (i == last) {
      out.rewards[i] = landscape.reward(theta_b);
    } else {
      // Integer weights keep the grid symmetric under swapping the endpoints.
      const double wa = static_cast<double>(last - i);
      const double wb = static_cast<double>(i);
      for (std::size_t j = 0; j < d; ++j) mix[j] = (wa * theta_a[j] + wb * theta_b[j]) / span;
      out.rewards[i] = landscape.reward(mix);
    }
  }
  const double floor = std::min(out.rewards.front(), out.rewards.back());
  for (double r : out.rewards) out.barrier = std::max(out.barrier, floor - r);
  return out;
}

ProbeResult directional_probe(std::span<const double> theta_base, std::span<const double> delta,
                              const Landscape& landscape, std::span<const double> magnitudes,
                              std::string label) {
  const std::size_t d = landscape.dimension();
  check_dimension(d, theta_base.size());
  check_dimension(d, delta.size());
  const double norm = std::sqrt(dot(delta, delta));
  if (!(norm > 0.0)) throw std::invalid_argument("probe direction must be nonzero");

  ProbeResult out;
  out.magnitudes.assign(magnitudes.begin(), magnitudes.end());
  out.direction_label = std::move(label);
  Vector point(d);
  for (double m : magnitudes) {
    if (m == norm) {
      for (std::size_t j = 0; j < d; ++j) point[j] = theta_base[j] + delta[j];
    } else {
      const double scale = m / norm;
      for (std::size_t j = 0; j < d; ++j) point[j] = theta_base[j] + scale * delta[j];
    }
    out.rewards.push_back(landscape.reward(point));
  }
  return out;
}

ProbeResult checkpoint_probe(std::span<const double> theta_base,
                             std::span<const double> theta_trained, const Landscape& landscape,
                             std::span<const double> magnitudes, std::string label) {
  check_dimension(theta_base.size(), theta_trained.size());
  Vector delta(theta_base.size());
  for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = theta_trained[j] - theta_base[j];
  ProbeResult out = directional_probe(theta_base, delta, landscape, magnitudes, std::move(label));
  const double norm = std::sqrt(dot(delta, delta));
  const double trained_reward = landscape.reward(theta_trained);
  for (std::size_t i = 0; i < magnitudes.size(); ++i) {
    if (magnitudes[i] == norm) out.rewards[i] = trained_reward;
  }
  return out;
}

Vector random_unit_direction(std::size_t dimension, Rng& rng) {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
  Vector u(dimension);
  double n = 0.0;
  do {
    rng.fill_normal(u);
    n = std::sqrt(dot(u, u));
  } while (!(n > 0.0));
  for (double& x : u) x /= n;
  return u;
}

std::vector<ProbeResult> random_direction_probe(std::span<const double> theta_base,
                                                const Landscape& landscape,
                                                std::span<const double> magnitudes,
                                                std::span<const std::uint64_t> seeds) {
  std::vector<ProbeResult> out;
  out.reserve(seeds.size());
  for (std::uint64_t seed : seeds) {
    Rng rng(seed);
    const Vector u = random_unit_direction(landscape.dimension(), rng);
    out.push_back(directional_probe(theta_base, u, landscape, magnitudes,
                                    "random[" + std::to_string(seed) + "]"));
  }
  return out;
}

// --- displacement hierarchy ---------------------------------------------------

HierarchyMeasurement hierarchy_measurement(std::span<const double> theta0,
                                           const Landscape& landscape, const NoiseModel& noise,
                                           const EsConfig& es, const GdConfig& gd,
                                           const HierarchyOptions& options) {
  check_dimension(landscape.dimension(), theta0.size());
  if (options.trials == 0) throw std::invalid_argument("hierarchy needs at least one trial");

  const RecordSpec keep{.directions = {}, .projection_stride = 1, .keep_final = true};
  HierarchyMeasurement out;
  const TrajectoryRecord gd_run = run_trajectory(theta0, landscape, noise, gd, options.steps, keep);
  out.gd_diverged = gd_run.diverged();
  out.gd_endpoint = *gd_run.final_theta;
  out.gd_sq = sq_distance(out.gd_endpoint, theta0);

  Vector gd_disp(theta0.size());
  for (std::size_t j = 0; j < gd_disp.size(); ++j) gd_disp[j] = out.gd_endpoint[j] - theta0[j];
  const double gd_norm = std::sqrt(dot(gd_disp, gd_disp));

  auto endpoints = run_trials(options.trials, options.threads, [&](std::size_t k) {
    EsConfig cfg = es;
    cfg.seed = trial_seed(options.master_seed, k);
    TrajectoryRecord rec = run_trajectory(theta0, landscape, noise, cfg, options.steps, keep);
    return rec.diverged() ? std::optional<Vector>{} : std::move(rec.final_theta);
  });

  Vector es_disp(theta0.size());
  for (auto& end : endpoints) {
    if (!end) {
      ++out.excluded_diverged;
      continue;
    }
    for (std::size_t j = 0; j < es_disp.size(); ++j) es_disp[j] = (*end)[j] - theta0[j];
    const double es_sq = dot(es_disp, es_disp);
    out.es_sq.push_back(es_sq);
    out.diff_sq.push_back(sq_distance(*end, out.gd_endpoint));
    if (gd_norm > 0.0 && es_sq > 0.0) {
      out.cosine_samples.push_back(dot(es_disp, gd_disp) / (gd_norm * std::sqrt(es_sq)));
    }
    if (options.keep_endpoints) out.es_endpoints.push_back(std::move(*end));
  }

  if (!out.es_sq.empty()) {
    const double kept = static_cast<double>(out.es_sq.size());
    for (double x : out.es_sq) out.es_sq_mean += x;
    for (double x : out.diff_sq) out.diff_sq_mean += x;
    out.es_sq_mean /= kept;
    out.diff_sq_mean /= kept;
  }
  return out;
}

}  // namespace eslab
