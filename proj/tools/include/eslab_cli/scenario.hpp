#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "eslab/landscape.hpp"
#include "eslab/optimizer.hpp"
#include "eslab/trajectory.hpp"

namespace eslab::cli {

using json = nlohmann::json;

/// Invalid scenario; `issues()` lists every offending field as "path: problem".
class ScenarioError : public std::runtime_error {
 public:
  explicit ScenarioError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

struct SpectrumBlock {
  double value = 0.0;
  std::size_t count = 0;
};

struct UniformSpectrum {
  double low = 0.0;
  double high = 1.0;
  std::uint64_t seed = 0;
};

/// Exactly one form is used: explicit values, rank-r with a single value
/// padded with zeros, blocks of repeated values padded with zeros, or i.i.d.
/// uniform draws.
struct SpectrumSpec {
  std::optional<std::vector<double>> values;
  std::optional<std::size_t> rank;
  std::optional<double> value;
  std::vector<SpectrumBlock> blocks;
  std::optional<UniformSpectrum> uniform;
};

/// Explicit values, or `norm` times a unit direction: "uniform" (all
/// coordinates equal), "axis" (e_axis) or "random" (seeded, on the sphere).
struct VectorSpec {
  std::optional<std::vector<double>> values;
  std::optional<double> norm;
  std::string direction = "uniform";
  std::size_t axis = 0;
  std::uint64_t seed = 0;
};

struct LandscapeSpec {
  LandscapeKind kind = LandscapeKind::flat;
  std::size_t dimension = 0;
  double constant = 0.0;
  VectorSpec v;
  SpectrumSpec spectrum;
  double sigma_xi = 0.0;
  BasisMode basis = BasisMode::canonical;
  std::uint64_t rotation_seed = 0;
};

/// θ₀ in eigenbasis coordinates: explicit values, or `fill` everywhere with
/// `active_fill` on the directions of nonzero curvature.
struct InitialSpec {
  std::optional<std::vector<double>> values;
  double fill = 0.0;
  std::optional<double> active_fill;
};

enum class Method { es, gd, ou };

struct OptimizerSection {
  Method method = Method::es;
  double sigma = 0.0;
  std::optional<double> alpha;        // default σ/2
  std::size_t population = 0;
  ZScoreDenominator zscore = ZScoreDenominator::population;
  std::optional<double> beta;
  std::optional<double> sigma_r_fixed;  // default σ_R(θ₀)
  bool noiseless = false;
  std::size_t steps = 0;
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  RecordSpec record;
};

struct AnalysisSection {
  bool fit = false;
  std::size_t interpolate_points = 9;
  std::vector<double> probe_magnitudes;
  std::vector<std::uint64_t> probe_random_seeds{1, 2, 3};
  std::optional<std::size_t> hierarchy_trials;  // default optimizer.trials
};

struct ValidationSection {
  std::vector<std::string> checks;
  std::map<std::string, double> tolerances;
  std::vector<std::size_t> times;
  /// Parameter values substituted on the prediction side only.
  std::map<std::string, double> prediction_overrides;
};

struct Scenario {
  std::string name;
  LandscapeSpec landscape;
  InitialSpec initial;
  OptimizerSection optimizer;
  AnalysisSection analysis;
  ValidationSection validation;
  std::string output_directory = "eslab_out";
};

Scenario parse_scenario(const json& doc);
Scenario load_scenario(const std::filesystem::path& path);
json to_json(const Scenario& scenario);

/// FNV-1a 64-bit hash of the canonical serialisation, as 16 hex digits.
std::string scenario_hash(const Scenario& scenario);

std::string to_string(Method method);

// --- materialisation ----------------------------------------------------------

std::vector<double> build_spectrum(const LandscapeSpec& spec);
std::vector<double> build_v(const LandscapeSpec& spec);
Landscape build_landscape(const LandscapeSpec& spec);
/// θ₀ in the ambient basis.
Vector build_initial(const Scenario& scenario, const Landscape& landscape);
/// θ₀ in eigenbasis coordinates (identical for non-quadratic landscapes).
Vector initial_coordinates(const Scenario& scenario, const std::vector<double>& spectrum);

NoiseModel noise_model(const Scenario& scenario);
double resolved_alpha(const OptimizerSection& opt);
/// σ_R at θ₀ from the closed form; requires a non-degenerate reward.
double reward_std_at_start(const Scenario& scenario);

EsConfig es_config(const Scenario& scenario);
GdConfig gd_config(const Scenario& scenario);
OuConfig ou_config(const Scenario& scenario);
OptimizerSpec optimizer_spec(const Scenario& scenario);

}  // namespace eslab::cli
