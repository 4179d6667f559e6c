#include "eslab_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "eslab/parallel.hpp"
#include "eslab/theory.hpp"
#include "eslab_cli/io.hpp"

namespace eslab::cli {
namespace fs = std::filesystem;

namespace {

std::string key(const std::string& base, std::size_t k) {
  return base + "[" + std::to_string(k) + "]";
}

std::string trial_name(const char* prefix, std::size_t k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s_%05zu.csv", prefix, k);
  return buf;
}

bool es_parameters_present(const OptimizerSection& o) { return o.sigma > 0.0 && o.population >= 1; }

// Directions whose per-direction predictions are emitted: the recorded ones,
// else the active ones (capped, since a spectrum may be large).
std::vector<std::size_t> reported_directions(const Scenario& s, const std::vector<double>& spectrum) {
  if (!s.optimizer.record.directions.empty()) return s.optimizer.record.directions;
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < spectrum.size() && out.size() < 16; ++k) {
    if (spectrum[k] != 0.0) out.push_back(k);
  }
  return out;
}

std::size_t rank_of(const std::vector<double>& spectrum) {
  return static_cast<std::size_t>(
      std::count_if(spectrum.begin(), spectrum.end(), [](double l) { return l != 0.0; }));
}

double vector_norm(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

void write_theta(const fs::path& path, const std::string& hash, const Vector& theta) {
  CsvTable t(hash, {"index[-]", "theta[param]"});
  for (std::size_t i = 0; i < theta.size(); ++i) t.row().cell(i).cell(theta[i]);
  write_atomic(path, t.str());
}

Vector read_theta(const fs::path& path, std::size_t dimension) {
  Vector theta = read_csv_column(path, "theta");
  check_dimension(dimension, theta.size());
  return theta;
}

theory::OuParameters ou_parameters(const Scenario& s) {
  const OptimizerSection& o = s.optimizer;
  theory::OuParameters p;
  p.alpha = resolved_alpha(o);
  p.sigma = o.sigma;
  p.population = o.population;
  p.sigma_r_fixed = o.sigma_r_fixed ? *o.sigma_r_fixed : reward_std_at_start(s);
  return p;
}

// Per-direction contraction factor of the configured method.
double contraction(const Scenario& s, double eigenvalue) {
  if (s.optimizer.method == Method::gd) return 1.0 - *s.optimizer.beta * eigenvalue;
  return ou_parameters(s).contraction(eigenvalue);
}

EsConfig es_config_checked(const Scenario& s) {
  EsConfig cfg = es_config(s);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ScenarioError({std::string("optimizer: ") + e.what()});
  }
  return cfg;
}

Vector es_endpoint(const Scenario& s, const Landscape& landscape, const Vector& theta0) {
  EsConfig cfg = es_config_checked(s);
  cfg.seed = trial_seed(s.optimizer.seed, 0);
  const RecordSpec keep{.directions = {}, .projection_stride = 1, .keep_final = true};
  TrajectoryRecord rec =
      run_trajectory(theta0, landscape, noise_model(s), cfg, s.optimizer.steps, keep);
  if (rec.diverged()) throw std::runtime_error("ES run diverged; no endpoint");
  return std::move(*rec.final_theta);
}

Vector gd_endpoint(const Scenario& s, const Landscape& landscape, const Vector& theta0) {
  const RecordSpec keep{.directions = {}, .projection_stride = 1, .keep_final = true};
  TrajectoryRecord rec =
      run_trajectory(theta0, landscape, noise_model(s), gd_config(s), s.optimizer.steps, keep);
  if (rec.diverged()) throw std::runtime_error("GD run diverged; no endpoint");
  return std::move(*rec.final_theta);
}

void predict_linear(const Scenario& s, json& out) {
  const OptimizerSection& o = s.optimizer;
  const LandscapeSpec& l = s.landscape;
  const double v_norm = l.v.norm ? *l.v.norm : vector_norm(*l.v.values);
  const double sigma_r = theory::sigma_r_linear(o.sigma, v_norm, l.sigma_xi);
  const double s_frac = theory::signal_fraction(o.sigma, v_norm, l.sigma_xi);
  const double alpha = resolved_alpha(o);
  const double n = static_cast<double>(o.population);
  const double attenuation = theory::zscore_mean_attenuation(o.population, o.zscore);
  out["prop2.v_norm"] = v_norm;
  out["prop2.sigma_r"] = sigma_r;
  out["prop2.signal_fraction"] = s_frac;
  out["prop2.mean_norm"] = alpha * o.sigma * v_norm / sigma_r;
  out["prop2.isotropic_coeff"] = alpha * alpha / n;
  out["prop2.rank1_coeff"] = alpha * alpha * o.sigma * o.sigma / (n * sigma_r * sigma_r);
  out["prop2.rho"] = theory::rho_linear(s_frac, o.population, l.dimension);
  out["prop2.zscore_mean_attenuation"] = attenuation;
  out["prop2.mean_norm_sample_zscore"] = attenuation * alpha * o.sigma * v_norm / sigma_r;
  out["prop2.rho_sample_zscore"] = theory::rho_linear_sample_zscore(s_frac, o.population, l.dimension);
}

void predict_quadratic(const Scenario& s, json& out) {
  const OptimizerSection& o = s.optimizer;
  const LandscapeSpec& l = s.landscape;
  const std::vector<double> spectrum = build_spectrum(l);
  const Vector coords = initial_coordinates(s, spectrum);
  const std::size_t d = l.dimension;
  const std::size_t r = rank_of(spectrum);
  const std::size_t steps = o.steps;

  Vector v(d);
  double trace = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    v[k] = spectrum[k] * coords[k];
    trace += spectrum[k] * spectrum[k];
  }
  const double v_norm = vector_norm(v);
  out["prop3.rank"] = r;
  out["prop3.trace_q2"] = trace;
  out["prop3.v_norm"] = v_norm;

  const std::vector<std::size_t> dirs = reported_directions(s, spectrum);
  const bool es_like = es_parameters_present(o);
  if (es_like && (v_norm > 0.0 || trace > 0.0 || l.sigma_xi > 0.0)) {
    const double alpha = resolved_alpha(o);
    const theory::StepMoments m = theory::es_step_moments(LandscapeKind::quadratic, v, spectrum,
                                                          o.sigma, alpha, o.population, l.sigma_xi);
    out["prop3.sigma_r"] = m.sigma_r;
    out["prop3.isotropic_coeff"] = m.isotropic_coeff;
    out["prop3.rank1_coeff"] = m.rank1_coeff;
    out["prop3.spectrum_coeff"] = m.spectrum_coeff;
    out["prop3.mean_norm"] = alpha * o.sigma * v_norm / m.sigma_r;
    if (v_norm > 0.0) {
      out["prop3.rho"] = theory::rho_quadratic(v, spectrum, o.sigma, o.population, l.sigma_xi);
    }

    const theory::OuParameters ou = ou_parameters(s);
    out["prop4.sigma_r_fixed"] = ou.sigma_r_fixed;
    out["prop4.effective_rate"] = ou.alpha * ou.sigma / ou.sigma_r_fixed;
    out["prop4.flat_variance_slope"] = theory::step_variance(alpha, o.population);
    for (std::size_t k : dirs) {
      const double g = ou.contraction(spectrum[k]);
      out[key("prop4.gamma", k)] = g;
      out[key("prop4.mean", k)] = theory::ou_projected_mean(coords[k], g, steps);
      out[key("prop4.variance", k)] = theory::ou_projected_variance(alpha, o.population, g, steps);
      out[key("prop4.stable", k)] = std::abs(g) < 1.0;
      if (std::abs(g) < 1.0) {
        out[key("prop4.asymptotic_variance", k)] =
            theory::ou_asymptotic_variance(alpha, o.population, g);
        out[key("prop4.timescale", k)] = theory::convergence_timescale(g);
      }
    }
    const theory::DisplacementDecomposition dec =
        theory::displacement_decomposition(coords, spectrum, ou, steps);
    out["prop7.signal_sq_norm"] = dec.signal_sq_norm;
    out["prop7.diffusion_sq_norm"] = dec.diffusion_sq_norm;
    out["prop7.total"] = dec.total;
    out["prop8.es_gd_diff_sq"] = theory::es_gd_difference(alpha, steps, d, r, o.population);
    out["prop8.d_eff_ratio"] = static_cast<double>(d - r) / static_cast<double>(d);
  }

  if (o.beta) {
    const double beta = *o.beta;
    std::size_t divergent = 0;
    for (double lam : spectrum) divergent += theory::gd_divergent(beta, lam) ? 1 : 0;
    out["prop5.divergent_directions"] = divergent;
    for (std::size_t k : dirs) {
      const theory::GdProjection p = theory::gd_projected(coords[k], beta, spectrum[k], steps);
      out[key("prop5.gamma", k)] = 1.0 - beta * spectrum[k];
      out[key("prop5.projection", k)] = p.value;
      out[key("prop5.stable", k)] = p.stable;
      out[key("prop5.divergent", k)] = theory::gd_divergent(beta, spectrum[k]);
    }
    double gd_sq = 0.0;
    for (std::size_t k = 0; k < d; ++k) {
      if (spectrum[k] == 0.0) continue;
      const double moved = coords[k] - theory::gd_projected(coords[k], beta, spectrum[k], steps).value;
      gd_sq += moved * moved;
    }
    out["prop6.gd_sq_norm"] = gd_sq;
  }
  if (r >= 1) out["remark.cosine_scale"] = theory::expected_cosine_scale(r, d);
}

void write_records(const Scenario& s, const SimulateResult& res, const fs::path& dir,
                   const std::string& hash) {
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    const TrajectoryRecord& rec = res.records[k];
    std::vector<std::string> cols{"step[-]", "drift_sq[param^2]", "mu_R[reward]", "sigma_R[reward]"};
    for (std::size_t dir_k : rec.directions) cols.push_back(key("proj", dir_k) + "[param]");
    CsvTable t(hash, cols);
    std::size_t p = 0;
    for (std::size_t step = 0; step < rec.drift.size(); ++step) {
      t.row().cell(step).cell(rec.drift[step]);
      if (step == 0) {
        t.empty().empty();
      } else {
        t.cell(rec.reward_mean[step - 1]).cell(rec.reward_std[step - 1]);
      }
      const bool has_proj = p < rec.projection_steps.size() && rec.projection_steps[p] == step;
      for (std::size_t j = 0; j < rec.directions.size(); ++j) {
        if (has_proj) t.cell(rec.projections[j][p]); else t.empty();
      }
      if (has_proj) ++p;
    }
    write_atomic(dir / "trials" / trial_name("trial", k), t.str());
    if (rec.final_theta) write_theta(dir / "trials" / trial_name("final", k), hash, *rec.final_theta);
  }

  if (res.stats) {
    const EnsembleStats& st = *res.stats;
    CsvTable e(hash, {"step[-]", "mean_drift_sq[param^2]", "stderr_drift_sq[param^2]"});
    for (std::size_t t = 0; t < st.mean_drift.size(); ++t) {
      e.row().cell(t).cell(st.mean_drift[t]).cell(st.stderr_drift[t]);
    }
    write_atomic(dir / "ensemble.csv", e.str());
    if (!st.directions.empty()) {
      std::vector<std::string> cols{"step[-]"};
      for (std::size_t k : st.directions) {
        cols.push_back(key("mean", k) + "[param]");
        cols.push_back(key("var", k) + "[param^2]");
      }
      CsvTable pt(hash, cols);
      for (std::size_t i = 0; i < st.projection_steps.size(); ++i) {
        pt.row().cell(st.projection_steps[i]);
        for (std::size_t j = 0; j < st.directions.size(); ++j) {
          pt.cell(st.projection_mean[j][i]).cell(st.projection_var[j][i]);
        }
      }
      write_atomic(dir / "projections.csv", pt.str());
    }
  }
  (void)s;
}

json fit_json(const DriftFit& fit) {
  json j;
  j["slope"] = fit.slope;
  j["r_squared"] = fit.r_squared ? json(*fit.r_squared) : json(nullptr);
  j["d_eff"] = fit.d_eff;
  j["d_eff_ratio"] = fit.d_eff_ratio;
  return j;
}

// --- validation ---------------------------------------------------------------

struct DirectionGroup {
  double eigenvalue = 0.0;
  double start = 0.0;
  std::vector<std::size_t> slots;
};

std::vector<DirectionGroup> group_directions(const Scenario& s, const std::vector<double>& spectrum,
                                             const Vector& coords) {
  std::vector<DirectionGroup> groups;
  const auto& dirs = s.optimizer.record.directions;
  for (std::size_t slot = 0; slot < dirs.size(); ++slot) {
    const std::size_t k = dirs[slot];
    auto it = std::find_if(groups.begin(), groups.end(), [&](const DirectionGroup& g) {
      return g.eigenvalue == spectrum[k] && g.start == coords[k];
    });
    if (it == groups.end()) {
      groups.push_back({spectrum[k], coords[k], {slot}});
    } else {
      it->slots.push_back(slot);
    }
  }
  return groups;
}

std::string group_label(const DirectionGroup& g) {
  std::ostringstream os;
  os << "lambda=" << format_number(g.eigenvalue);
  return os.str();
}

class Validator {
 public:
  Validator(const Scenario& s, ValidationReport& report) : s_(s), report_(report) {}

  double tolerance(const std::string& check) const {
    auto it = s_.validation.tolerances.find(check);
    if (it == s_.validation.tolerances.end()) {
      throw ScenarioError({"validation.tolerances." + check + ": missing for requested check"});
    }
    return it->second;
  }

  void relative(const std::string& name, double predicted, double observed, double tol) {
    const bool pass = std::abs(observed - predicted) <= tol * std::abs(predicted);
    report_.rows.push_back({name, predicted, observed, tol, pass});
  }

  void absolute(const std::string& name, double predicted, double observed, double tol) {
    const bool pass = std::abs(observed - predicted) <= tol;
    report_.rows.push_back({name, predicted, observed, tol, pass});
  }

  void upper_bound(const std::string& name, double bound, double observed, double tol) {
    report_.rows.push_back({name, bound, observed, tol, observed <= bound});
  }

 private:
  const Scenario& s_;
  ValidationReport& report_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ScenarioError({"validation.checks: " + what});
}

}  // namespace

// --- predict ------------------------------------------------------------------

Scenario with_prediction_overrides(const Scenario& scenario) {
  Scenario s = scenario;
  for (const auto& [name, value] : scenario.validation.prediction_overrides) {
    if (name == "alpha") s.optimizer.alpha = value;
    else if (name == "sigma") s.optimizer.sigma = value;
    else if (name == "population") s.optimizer.population = static_cast<std::size_t>(value);
    else if (name == "sigma_xi") s.landscape.sigma_xi = value;
    else if (name == "beta") s.optimizer.beta = value;
    else if (name == "sigma_r_fixed") s.optimizer.sigma_r_fixed = value;
  }
  return s;
}

json cmd_predict(const Scenario& s) {
  json out = json::object();
  const OptimizerSection& o = s.optimizer;
  const std::size_t d = s.landscape.dimension;
  out["meta.scenario_hash"] = scenario_hash(s);
  out["meta.dimension"] = d;
  out["meta.steps"] = o.steps;
  if (es_parameters_present(o)) {
    const double alpha = resolved_alpha(o);
    out["meta.alpha"] = alpha;
    out["prop1.slope"] = theory::flat_drift_slope(alpha, d, o.population);
    out["prop1.flat_drift"] = theory::flat_drift(alpha, o.steps, d, o.population);
    out["prop1.step_variance"] = theory::step_variance(alpha, o.population);
    if (s.landscape.kind == LandscapeKind::flat) {
      out["prop1.d_eff_ratio"] = 1.0;
      out["prop1.degenerate"] = s.landscape.sigma_xi == 0.0;
    }
  }
  if (s.landscape.kind == LandscapeKind::linear && es_parameters_present(o) && o.population >= 2) {
    predict_linear(s, out);
  }
  if (s.landscape.kind == LandscapeKind::quadratic) predict_quadratic(s, out);
  return out;
}

// --- simulate -----------------------------------------------------------------

SimulateResult cmd_simulate(const Scenario& s, const RunOptions& options) {
  const Landscape landscape = build_landscape(s.landscape);
  const Vector theta0 = build_initial(s, landscape);
  const NoiseModel noise = noise_model(s);
  OptimizerSpec base = optimizer_spec(s);
  std::visit([](const auto& cfg) { cfg.validate(); }, base);

  SimulateResult res;
  res.records = run_trials(s.optimizer.trials, options.threads, [&](std::size_t k) {
    OptimizerSpec spec = base;
    const std::uint64_t seed = trial_seed(s.optimizer.seed, k);
    if (auto* es = std::get_if<EsConfig>(&spec)) es->seed = seed;
    if (auto* ou = std::get_if<OuConfig>(&spec)) ou->seed = seed;
    return run_trajectory(theta0, landscape, noise, spec, s.optimizer.steps, s.optimizer.record);
  });

  std::vector<TrajectoryRecord> complete;
  std::size_t degenerate = 0;
  for (std::size_t k = 0; k < res.records.size(); ++k) {
    degenerate += res.records[k].degenerate_steps;
    if (res.records[k].diverged()) {
      res.diverged_trials.push_back(k);
    } else {
      complete.push_back(res.records[k]);
    }
  }
  if (!complete.empty()) res.stats = ensemble_stats(complete);

  const std::string hash = scenario_hash(s);
  json& sum = res.summary;
  sum["scenario_hash"] = hash;
  sum["method"] = to_string(s.optimizer.method);
  sum["trials"] = s.optimizer.trials;
  sum["steps"] = s.optimizer.steps;
  sum["diverged_trials"] = res.diverged_trials;
  sum["degenerate_steps"] = degenerate;
  for (std::size_t k : res.diverged_trials) {
    sum["diverged_at"][std::to_string(k)] = *res.records[k].diverged_at;
  }
  if (res.stats) {
    sum["final_mean_drift_sq"] = res.stats->mean_drift.back();
    sum["final_stderr_drift_sq"] = res.stats->stderr_drift.back();
    if (s.analysis.fit && res.stats->mean_drift.size() >= 2 && es_parameters_present(s.optimizer)) {
      sum["fit"] = fit_json(fit_drift(res.stats->mean_drift, resolved_alpha(s.optimizer),
                                      s.optimizer.population, s.landscape.dimension));
    }
  }

  if (options.write_files) {
    write_records(s, res, options.out_dir, hash);
    write_json(options.out_dir / "summary.json", sum);
  }
  return res;
}

// --- fit ----------------------------------------------------------------------

json cmd_fit(const Scenario* s, const FitInputs& in, const RunOptions& options) {
  auto pick = [&](auto given, auto from_scenario, const char* what) {
    if (given) return *given;
    if (!s) throw ScenarioError({std::string(what) + ": give --scenario or the explicit flag"});
    return from_scenario();
  };
  const double alpha = pick(in.alpha, [&] { return resolved_alpha(s->optimizer); }, "alpha");
  const std::size_t population =
      pick(in.population, [&] { return s->optimizer.population; }, "population");
  const std::size_t dimension =
      pick(in.dimension, [&] { return s->landscape.dimension; }, "dimension");

  DriftFit fit;
  std::string source;
  if (in.slope) {
    fit = drift_fit_from_slope(*in.slope, alpha, population, dimension);
    source = "slope";
  } else if (in.drift_csv) {
    std::vector<double> curve;
    try {
      curve = read_csv_column(*in.drift_csv, "mean_drift_sq");
    } catch (const std::runtime_error&) {
      curve = read_csv_column(*in.drift_csv, "drift_sq");
    }
    fit = fit_drift(curve, alpha, population, dimension);
    source = in.drift_csv->string();
  } else {
    if (!s) throw ScenarioError({"fit: needs --slope, --drift-csv or --scenario"});
    RunOptions quiet = options;
    quiet.write_files = false;
    const SimulateResult sim = cmd_simulate(*s, quiet);
    if (!sim.stats) throw std::runtime_error("every trial diverged; nothing to fit");
    fit = fit_drift(sim.stats->mean_drift, alpha, population, dimension);
    source = "simulation";
  }

  json out = fit_json(fit);
  out["source"] = source;
  out["alpha"] = alpha;
  out["population"] = population;
  out["dimension"] = dimension;
  if (s && options.write_files) write_json(options.out_dir / "fit.json", out);
  return out;
}

// --- interpolate / probe / hierarchy ------------------------------------------------

json cmd_interpolate(const Scenario& s, const EndpointInputs& in, const RunOptions& options) {
  const Landscape landscape = build_landscape(s.landscape);
  const Vector theta0 = build_initial(s, landscape);
  const std::size_t d = landscape.dimension();
  const Vector a = in.theta_a ? read_theta(*in.theta_a, d) : es_endpoint(s, landscape, theta0);
  const Vector b = in.theta_b ? read_theta(*in.theta_b, d) : gd_endpoint(s, landscape, theta0);
  const InterpolationResult res = interpolate_path(a, b, landscape, s.analysis.interpolate_points);

  const std::string hash = scenario_hash(s);
  json out;
  out["points"] = res.mixing.size();
  out["reward_a"] = res.rewards.front();
  out["reward_b"] = res.rewards.back();
  out["reward_start"] = landscape.reward(theta0);
  out["barrier"] = res.barrier;
  const double gain = std::abs(landscape.reward(theta0) - res.rewards.back());
  out["barrier_relative"] = gain > 0.0 ? json(res.barrier / gain) : json(nullptr);
  if (options.write_files) {
    CsvTable t(hash, {"mixing[-]", "reward[reward]"});
    for (std::size_t i = 0; i < res.mixing.size(); ++i) t.row().cell(res.mixing[i]).cell(res.rewards[i]);
    write_atomic(options.out_dir / "interpolation.csv", t.str());
    write_json(options.out_dir / "interpolate.json", out);
  }
  return out;
}

json cmd_probe(const Scenario& s, const std::optional<fs::path>& trained_path,
               const RunOptions& options) {
  const Landscape landscape = build_landscape(s.landscape);
  const Vector theta0 = build_initial(s, landscape);
  const Vector trained = trained_path ? read_theta(*trained_path, landscape.dimension())
                                      : es_endpoint(s, landscape, theta0);
  double delta_norm = 0.0;
  for (std::size_t i = 0; i < trained.size(); ++i) {
    delta_norm += (trained[i] - theta0[i]) * (trained[i] - theta0[i]);
  }
  delta_norm = std::sqrt(delta_norm);
  if (!(delta_norm > 0.0)) throw std::runtime_error("trained point equals the base point");

  std::vector<double> magnitudes = s.analysis.probe_magnitudes;
  if (magnitudes.empty()) {
    for (double f : {0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0}) magnitudes.push_back(f * delta_norm);
    magnitudes[4] = delta_norm;
  }
  std::vector<ProbeResult> probes;
  probes.push_back(checkpoint_probe(theta0, trained, landscape, magnitudes, "trained"));
  for (ProbeResult& p : random_direction_probe(theta0, landscape, magnitudes,
                                               s.analysis.probe_random_seeds)) {
    probes.push_back(std::move(p));
  }

  json out;
  out["delta_norm"] = delta_norm;
  out["reward_base"] = landscape.reward(theta0);
  out["reward_trained"] = landscape.reward(trained);
  for (const ProbeResult& p : probes) out["rewards"][p.direction_label] = p.rewards;
  out["magnitudes"] = magnitudes;
  if (options.write_files) {
    CsvTable t(scenario_hash(s), {"direction[-]", "magnitude[param]", "reward[reward]"});
    for (const ProbeResult& p : probes) {
      for (std::size_t i = 0; i < p.magnitudes.size(); ++i) {
        t.row().cell(p.direction_label).cell(p.magnitudes[i]).cell(p.rewards[i]);
      }
    }
    write_atomic(options.out_dir / "probe.csv", t.str());
    write_json(options.out_dir / "probe.json", out);
  }
  return out;
}

namespace {

struct HierarchyRun {
  HierarchyMeasurement measurement;
  json summary;
};

HierarchyRun run_hierarchy(const Scenario& s, const RunOptions& options, bool keep_endpoints) {
  const Landscape landscape = build_landscape(s.landscape);
  const Vector theta0 = build_initial(s, landscape);
  HierarchyOptions opts;
  opts.steps = s.optimizer.steps;
  opts.trials = s.analysis.hierarchy_trials.value_or(s.optimizer.trials);
  opts.master_seed = s.optimizer.seed;
  opts.threads = options.threads;
  opts.keep_endpoints = keep_endpoints;
  HierarchyRun run;
  run.measurement = hierarchy_measurement(theta0, landscape, noise_model(s), es_config_checked(s),
                                          gd_config(s), opts);
  const HierarchyMeasurement& m = run.measurement;

  json& j = run.summary;
  j["gd_sq"] = m.gd_sq;
  j["es_sq_mean"] = m.es_sq_mean;
  j["diff_sq_mean"] = m.diff_sq_mean;
  j["trials_kept"] = m.es_sq.size();
  j["excluded_diverged"] = m.excluded_diverged;
  j["gd_diverged"] = m.gd_diverged;
  if (m.cosine_samples.empty()) {
    j["mean_cosine"] = nullptr;
  } else {
    double c = 0.0;
    for (double x : m.cosine_samples) c += x;
    j["mean_cosine"] = c / static_cast<double>(m.cosine_samples.size());
  }
  const json pred = cmd_predict(s);
  for (const char* k : {"prop6.gd_sq_norm", "prop7.total", "prop8.es_gd_diff_sq", "remark.cosine_scale"}) {
    if (pred.contains(k)) j["predicted"][k] = pred[k];
  }
  return run;
}

}  // namespace

json cmd_hierarchy(const Scenario& s, const RunOptions& options) {
  HierarchyRun run = run_hierarchy(s, options, false);
  if (options.write_files) {
    const HierarchyMeasurement& m = run.measurement;
    CsvTable t(scenario_hash(s),
               {"trial[-]", "es_sq[param^2]", "diff_sq[param^2]", "cosine[-]"});
    for (std::size_t i = 0; i < m.es_sq.size(); ++i) {
      t.row().cell(i).cell(m.es_sq[i]).cell(m.diff_sq[i]);
      if (i < m.cosine_samples.size()) t.cell(m.cosine_samples[i]); else t.empty();
    }
    write_atomic(options.out_dir / "hierarchy.csv", t.str());
    write_json(options.out_dir / "hierarchy.json", run.summary);
  }
  return run.summary;
}

// --- validate -----------------------------------------------------------------

bool ValidationReport::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ValidationRow& r) { return r.pass; });
}

ValidationReport cmd_validate(const Scenario& s, const RunOptions& options) {
  const auto& checks = s.validation.checks;
  if (checks.empty()) throw ScenarioError({"validation.checks: nothing to validate"});
  ValidationReport report;
  Validator v(s, report);
  for (const std::string& c : checks) (void)v.tolerance(c);

  const Scenario predicted_side = with_prediction_overrides(s);
  const json pred = cmd_predict(predicted_side);
  const LandscapeKind kind = s.landscape.kind;
  const std::vector<double> spectrum =
      kind == LandscapeKind::quadratic ? build_spectrum(s.landscape) : std::vector<double>{};
  const Vector coords = initial_coordinates(s, spectrum);

  auto wants = [&](const char* name) {
    return std::find(checks.begin(), checks.end(), name) != checks.end();
  };
  const bool needs_sim = wants("drift") || wants("drift_fit") || wants("projection_mean") ||
                         wants("projection_variance") || wants("flat_variance_slope") ||
                         wants("gd_projection");
  std::optional<SimulateResult> sim;
  if (needs_sim) {
    sim = cmd_simulate(s, options);
    report.diverged = !sim->diverged_trials.empty();
    if (!sim->stats) throw std::runtime_error("every trial diverged; nothing to validate");
  }

  if (wants("drift")) {
    require(kind != LandscapeKind::linear, "drift has no closed form on a linear landscape");
    const char* k = kind == LandscapeKind::flat ? "prop1.flat_drift" : "prop7.total";
    require(pred.contains(k), "drift needs ES parameters");
    v.relative("drift", pred[k].get<double>(), sim->stats->mean_drift.back(), v.tolerance("drift"));
  }
  if (wants("drift_fit")) {
    require(kind != LandscapeKind::linear, "drift_fit has no closed form on a linear landscape");
    const Scenario& ps = predicted_side;
    const DriftFit fit = fit_drift(sim->stats->mean_drift, resolved_alpha(ps.optimizer),
                                   ps.optimizer.population, ps.landscape.dimension);
    const double expected = kind == LandscapeKind::flat
                                ? 1.0
                                : static_cast<double>(s.landscape.dimension - rank_of(spectrum)) /
                                      static_cast<double>(s.landscape.dimension);
    v.relative("drift_fit.d_eff_ratio", expected, fit.d_eff_ratio, v.tolerance("drift_fit"));
    auto it = s.validation.tolerances.find("drift_fit_r_squared");
    if (it != s.validation.tolerances.end()) {
      const double r2 = fit.r_squared.value_or(0.0);
      report.rows.push_back({"drift_fit.r_squared", it->second, r2, it->second, r2 >= it->second});
    }
  }

  const bool wants_projection = wants("projection_mean") || wants("projection_variance") ||
                                wants("flat_variance_slope") || wants("gd_projection");
  if (wants_projection) {
    require(kind == LandscapeKind::quadratic, "projection checks need a quadratic landscape");
    require(!s.optimizer.record.directions.empty(), "projection checks need record.directions");
  }
  std::vector<std::size_t> times = s.validation.times;
  if (times.empty()) times.push_back(s.optimizer.steps);
  const std::vector<DirectionGroup> groups =
      wants_projection ? group_directions(s, spectrum, coords) : std::vector<DirectionGroup>{};
  const std::vector<std::size_t>& proj_steps =
      sim && sim->stats ? sim->stats->projection_steps : std::vector<std::size_t>{};
  auto step_index = [&](std::size_t t) -> std::size_t {
    auto it = std::find(proj_steps.begin(), proj_steps.end(), t);
    require(it != proj_steps.end(),
            "time " + std::to_string(t) + " is not a recorded projection step");
    return static_cast<std::size_t>(it - proj_steps.begin());
  };
  std::vector<TrajectoryRecord> complete;
  if (sim) {
    for (const TrajectoryRecord& r : sim->records) {
      if (!r.diverged()) complete.push_back(r);
    }
  }

  if (wants("projection_mean") || wants("projection_variance")) {
    require(s.optimizer.method != Method::gd, "projection statistics need a stochastic method");
    const double alpha = resolved_alpha(predicted_side.optimizer);
    for (const DirectionGroup& g : groups) {
      const double gamma = contraction(predicted_side, g.eigenvalue);
      if (std::abs(gamma) > 1.0) continue;
      const PooledProjection pooled = pooled_projection(complete, g.slots);
      for (std::size_t t : times) {
        const std::size_t i = step_index(t);
        const std::string label = group_label(g) + ",t=" + std::to_string(t);
        const double var =
            theory::ou_projected_variance(alpha, predicted_side.optimizer.population, gamma, t);
        if (wants("projection_mean")) {
          const double pm = theory::ou_projected_mean(g.start, gamma, t);
          const double scale = g.start != 0.0 ? std::abs(g.start) : std::sqrt(var);
          const double tol = v.tolerance("projection_mean");
          report.rows.push_back({"projection_mean[" + label + "]", pm, pooled.mean[i], tol,
                                 std::abs(pooled.mean[i] - pm) <= tol * scale});
        }
        if (wants("projection_variance")) {
          v.relative("projection_variance[" + label + "]", var, pooled.variance[i],
                     v.tolerance("projection_variance"));
        }
      }
    }
  }

  if (wants("flat_variance_slope")) {
    bool any = false;
    for (const DirectionGroup& g : groups) {
      if (g.eigenvalue != 0.0) continue;
      any = true;
      const PooledProjection pooled = pooled_projection(complete, g.slots);
      double stv = 0.0;
      double stt = 0.0;
      for (std::size_t i = 0; i < pooled.steps.size(); ++i) {
        const double t = static_cast<double>(pooled.steps[i]);
        stv += t * pooled.variance[i];
        stt += t * t;
      }
      v.relative("flat_variance_slope[" + group_label(g) + "]",
                 pred["prop4.flat_variance_slope"].get<double>(), stv / stt,
                 v.tolerance("flat_variance_slope"));
    }
    require(any, "flat_variance_slope needs a recorded direction with zero curvature");
  }

  if (wants("gd_projection")) {
    require(s.optimizer.method == Method::gd, "gd_projection needs method gd");
    const double beta = *predicted_side.optimizer.beta;
    const TrajectoryRecord& rec = sim->records.front();
    const double tol = v.tolerance("gd_projection");
    for (std::size_t slot = 0; slot < rec.directions.size(); ++slot) {
      const std::size_t k = rec.directions[slot];
      if (theory::gd_divergent(beta, spectrum[k])) continue;
      double worst = 0.0;
      double worst_pred = 0.0;
      double worst_obs = 0.0;
      for (std::size_t i = 0; i < rec.projection_steps.size(); ++i) {
        const double p = theory::gd_projected(coords[k], beta, spectrum[k], rec.projection_steps[i]).value;
        const double o = rec.projections[slot][i];
        const double err = p == 0.0 ? (o == 0.0 ? 0.0 : INFINITY) : std::abs(o - p) / std::abs(p);
        if (err >= worst) {
          worst = err;
          worst_pred = p;
          worst_obs = o;
        }
      }
      report.rows.push_back({key("gd_projection", k), worst_pred, worst_obs, tol, worst <= tol});
    }
  }

  const bool wants_hier = wants("gd_sq") || wants("hierarchy_diff") || wants("cosine_band") ||
                          wants("barrier");
  if (wants_hier) {
    require(kind == LandscapeKind::quadratic, "hierarchy checks need a quadratic landscape");
    HierarchyRun run = run_hierarchy(s, options, wants("barrier"));
    const HierarchyMeasurement& m = run.measurement;
    report.diverged = report.diverged || m.excluded_diverged > 0 || m.gd_diverged;
    if (wants("gd_sq")) {
      v.absolute("gd_sq", pred["prop6.gd_sq_norm"].get<double>(), m.gd_sq, v.tolerance("gd_sq"));
    }
    if (wants("hierarchy_diff")) {
      v.relative("hierarchy_diff", pred["prop8.es_gd_diff_sq"].get<double>(), m.diff_sq_mean,
                 v.tolerance("hierarchy_diff"));
    }
    if (wants("cosine_band")) {
      require(!m.cosine_samples.empty(), "cosine undefined: GD did not move");
      double c = 0.0;
      for (double x : m.cosine_samples) c += x;
      c /= static_cast<double>(m.cosine_samples.size());
      const double tol = v.tolerance("cosine_band");
      v.upper_bound("cosine_band", tol * pred["remark.cosine_scale"].get<double>(), std::abs(c), tol);
    }
    if (wants("barrier")) {
      const Landscape landscape = build_landscape(s.landscape);
      const Vector theta0 = build_initial(s, landscape);
      double mean_barrier = 0.0;
      for (const Vector& end : m.es_endpoints) {
        mean_barrier += interpolate_path(end, m.gd_endpoint, landscape, s.analysis.interpolate_points).barrier;
      }
      mean_barrier /= static_cast<double>(std::max<std::size_t>(1, m.es_endpoints.size()));
      const double gain = std::abs(landscape.reward(theta0) - landscape.reward(m.gd_endpoint));
      const double tol = v.tolerance("barrier");
      v.upper_bound("barrier", tol * gain, mean_barrier, tol);
    }
  }

  if (options.write_files) {
    CsvTable t(scenario_hash(s), {"quantity[-]", "predicted[mixed]", "observed[mixed]",
                                  "tolerance[mixed]", "verdict[-]"});
    json j;
    for (const ValidationRow& r : report.rows) {
      t.row().cell(r.quantity).cell(r.predicted).cell(r.observed).cell(r.tolerance)
          .cell(r.pass ? "PASS" : "FAIL");
      j["rows"].push_back({{"quantity", r.quantity}, {"predicted", r.predicted},
                           {"observed", r.observed}, {"tolerance", r.tolerance},
                           {"pass", r.pass}});
    }
    j["pass"] = report.pass();
    j["diverged"] = report.diverged;
    write_atomic(options.out_dir / "validation.csv", t.str());
    write_json(options.out_dir / "validation.json", j);
  }
  return report;
}

// --- command line ---------------------------------------------------------------

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Evolution-strategies laboratory on analytic reward landscapes", "eslab"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string scenario_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  bool quiet = false;
  app.add_option("--scenario", scenario_path, "Scenario JSON file");
  app.add_option("--out", out_dir, "Output directory (overrides the scenario)");
  app.add_option("--seed", seed, "Master seed (overrides the scenario)");
  app.add_option("--threads", threads, "Worker threads (default: $ESLAB_THREADS, else all cores)");
  app.add_flag("--quiet", quiet, "Suppress console output");

  auto* predict = app.add_subcommand("predict", "Closed-form predictions as flat JSON");
  auto* simulate = app.add_subcommand("simulate", "Run all trials and write trajectories");
  auto* fit = app.add_subcommand("fit", "Drift regression and effective dimension");
  auto* interpolate = app.add_subcommand("interpolate", "Rewards along the line between endpoints");
  auto* probe = app.add_subcommand("probe", "Rewards along trained and random directions");
  auto* hierarchy = app.add_subcommand("hierarchy", "ES/GD displacement hierarchy");
  auto* validate = app.add_subcommand("validate", "Theory against simulation with tolerances");

  FitInputs fit_in;
  fit->add_option("--slope", fit_in.slope, "Drift slope per step");
  fit->add_option("--drift-csv", fit_in.drift_csv, "CSV with a drift_sq or mean_drift_sq column");
  fit->add_option("--alpha", fit_in.alpha, "Step size");
  fit->add_option("--population", fit_in.population, "Population size N");
  fit->add_option("--dimension", fit_in.dimension, "Parameter dimension d");
  EndpointInputs ends;
  interpolate->add_option("--theta-a", ends.theta_a, "Parameter CSV for the first endpoint");
  interpolate->add_option("--theta-b", ends.theta_b, "Parameter CSV for the second endpoint");
  std::optional<fs::path> trained;
  probe->add_option("--theta", trained, "Parameter CSV of the trained point");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    std::optional<Scenario> scenario;
    if (!scenario_path.empty()) {
      scenario = load_scenario(scenario_path);
      if (seed) scenario->optimizer.seed = *seed;
      if (!out_dir.empty()) scenario->output_directory = out_dir;
    }
    RunOptions options;
    options.threads = resolve_thread_count(threads);
    options.quiet = quiet;
    if (scenario) options.out_dir = scenario->output_directory;
    if (!out_dir.empty()) options.out_dir = out_dir;

    auto need_scenario = [&]() -> const Scenario& {
      if (!scenario) throw ScenarioError({"--scenario: required for this command"});
      return *scenario;
    };
    auto print = [&](const json& j) {
      if (!quiet) out << j.dump(2) << "\n";
    };

    if (predict->parsed()) {
      const json j = cmd_predict(need_scenario());
      write_json(options.out_dir / "predict.json", j);
      print(j);
      return kExitOk;
    }
    if (simulate->parsed()) {
      const SimulateResult res = cmd_simulate(need_scenario(), options);
      print(res.summary);
      return res.diverged_trials.empty() ? kExitOk : kExitDiverged;
    }
    if (fit->parsed()) {
      print(cmd_fit(scenario ? &*scenario : nullptr, fit_in, options));
      return kExitOk;
    }
    if (interpolate->parsed()) {
      print(cmd_interpolate(need_scenario(), ends, options));
      return kExitOk;
    }
    if (probe->parsed()) {
      print(cmd_probe(need_scenario(), trained, options));
      return kExitOk;
    }
    if (hierarchy->parsed()) {
      const json j = cmd_hierarchy(need_scenario(), options);
      print(j);
      return j["excluded_diverged"].get<std::size_t>() > 0 || j["gd_diverged"].get<bool>()
                 ? kExitDiverged
                 : kExitOk;
    }
    if (validate->parsed()) {
      const ValidationReport report = cmd_validate(need_scenario(), options);
      if (!quiet) {
        auto row = [&](const std::string& q, const std::string& p, const std::string& o,
                       const std::string& t, const std::string& verdict) {
          out << std::left << std::setw(44) << q << ' ' << std::setw(24) << p << ' '
              << std::setw(24) << o << ' ' << std::setw(10) << t << ' ' << verdict << "\n";
        };
        row("quantity", "predicted", "observed", "tolerance", "verdict");
        for (const ValidationRow& r : report.rows) {
          row(r.quantity, format_number(r.predicted), format_number(r.observed),
              format_number(r.tolerance), r.pass ? "PASS" : "FAIL");
        }
        out << (report.pass() ? "overall PASS" : "overall FAIL") << "\n";
      }
      if (!report.pass()) return kExitValidationFailed;
      return report.diverged ? kExitDiverged : kExitOk;
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace eslab::cli
