#include "eslab/trajectory.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace eslab {
namespace {

struct StepOutcome {
  double reward_mean = 0.0;
  double reward_std = 0.0;
  bool degenerate = false;
};

// Drift and divergence share one pass over θ.
struct Scan {
  double drift = 0.0;
  bool diverged = false;
};

Scan scan(std::span<const double> theta, std::span<const double> theta0) {
  Scan s;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double x = theta[i];
    if (!std::isfinite(x) || std::abs(x) > kDivergenceThreshold) {
      s.diverged = true;
      return s;
    }
    const double dx = x - theta0[i];
    s.drift += dx * dx;
  }
  return s;
}

}  // namespace

TrajectoryRecord run_trajectory(std::span<const double> theta0, const Landscape& landscape,
                                const NoiseModel& noise, const OptimizerSpec& optimizer,
                                std::size_t steps, const RecordSpec& record) {
  const std::size_t d = landscape.dimension();
  check_dimension(d, theta0.size());
  if (record.projection_stride == 0) throw std::invalid_argument("projection_stride must be positive");
  for (std::size_t k : record.directions) {
    if (k >= d) throw std::out_of_range("recorded direction index out of range");
  }

  const QuadraticLandscape* spectrum = landscape.as_quadratic();
  if (std::holds_alternative<OuConfig>(optimizer)) {
    if (!spectrum) throw std::invalid_argument("ou dynamics need a quadratic landscape");
  }
  std::visit([](const auto& cfg) { cfg.validate(); }, optimizer);

  std::uint64_t seed = 0;
  if (const auto* es = std::get_if<EsConfig>(&optimizer)) seed = es->seed;
  if (const auto* ou = std::get_if<OuConfig>(&optimizer)) seed = ou->seed;
  Rng rng(seed);

  TrajectoryRecord rec;
  rec.steps = steps;
  rec.directions = record.directions;
  rec.projections.resize(record.directions.size());
  rec.drift.reserve(steps + 1);
  rec.reward_mean.reserve(steps);
  rec.reward_std.reserve(steps);

  Vector theta(theta0.begin(), theta0.end());
  auto record_projections = [&](std::size_t t) {
    rec.projection_steps.push_back(t);
    for (std::size_t j = 0; j < record.directions.size(); ++j) {
      rec.projections[j].push_back(landscape.project(theta, record.directions[j]));
    }
  };

  rec.drift.push_back(0.0);
  if (!record.directions.empty()) record_projections(0);

  std::optional<EsWorkspace> workspace;
  if (std::holds_alternative<EsConfig>(optimizer)) workspace.emplace(d);

  for (std::size_t t = 1; t <= steps; ++t) {
    StepOutcome out = std::visit(
        [&](const auto& cfg) -> StepOutcome {
          using Cfg = std::decay_t<decltype(cfg)>;
          if constexpr (std::is_same_v<Cfg, EsConfig>) {
            const StepDiagnostics diag =
                es_step_inplace(theta, landscape, noise, cfg, rng, *workspace);
            return {diag.reward_mean, diag.reward_std, diag.degenerate};
          } else if constexpr (std::is_same_v<Cfg, GdConfig>) {
            const double r = landscape.reward(theta);
            gd_step_inplace(theta, landscape, cfg);
            return {r, 0.0, false};
          } else {
            const double r = landscape.reward(theta);
            ou_step_inplace(theta, cfg, *spectrum, rng);
            return {r, 0.0, false};
          }
        },
        optimizer);

    const Scan s = scan(theta, theta0);
    if (s.diverged) {
      rec.diverged_at = t;
      break;
    }
    rec.drift.push_back(s.drift);
    rec.reward_mean.push_back(out.reward_mean);
    rec.reward_std.push_back(out.reward_std);
    if (out.degenerate) ++rec.degenerate_steps;
    rec.steps_completed = t;
    if (!record.directions.empty() && (t % record.projection_stride == 0 || t == steps)) {
      record_projections(t);
    }
  }

  if (record.keep_final) rec.final_theta = std::move(theta);
  return rec;
}

}  // namespace eslab
