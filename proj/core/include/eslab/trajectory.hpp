#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "eslab/landscape.hpp"
#include "eslab/optimizer.hpp"

namespace eslab {

/// Any coordinate beyond this magnitude marks the run as diverged.
inline constexpr double kDivergenceThreshold = 1e30;

struct RecordSpec {
  /// Eigendirections k whose projections u_k·θ_t are recorded.
  std::vector<std::size_t> directions;
  /// Projections are recorded at t = 0, stride, 2·stride, … and at the last step.
  std::size_t projection_stride = 1;
  bool keep_final = false;
};

struct TrajectoryRecord {
  std::size_t steps = 0;             // requested T
  std::size_t steps_completed = 0;   // T unless the run diverged
  /// ‖θ_t − θ₀‖² for t = 0..steps_completed.
  std::vector<double> drift;
  std::vector<std::size_t> directions;
  std::vector<std::size_t> projection_steps;
  /// projections[j][i] = u_{directions[j]}·θ_{projection_steps[i]}.
  std::vector<std::vector<double>> projections;
  /// Entry t−1 describes the rewards seen while taking step t. ES records the
  /// population mean and spread; GD and OU record the exact reward at θ_{t−1}
  /// and a spread of zero.
  std::vector<double> reward_mean;
  std::vector<double> reward_std;
  std::size_t degenerate_steps = 0;
  /// First step whose result was non-finite or exceeded the threshold.
  std::optional<std::size_t> diverged_at;
  std::optional<Vector> final_theta;

  bool diverged() const { return diverged_at.has_value(); }
};

using OptimizerSpec = std::variant<EsConfig, GdConfig, OuConfig>;

/// Runs T steps from θ₀. The random stream is seeded once from the config's
/// seed and continues across all steps. OU requires a quadratic landscape.
TrajectoryRecord run_trajectory(std::span<const double> theta0, const Landscape& landscape,
                                const NoiseModel& noise, const OptimizerSpec& optimizer,
                                std::size_t steps, const RecordSpec& record = {});

}  // namespace eslab
