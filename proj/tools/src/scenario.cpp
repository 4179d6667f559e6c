#include "eslab_cli/scenario.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "eslab/analysis.hpp"
#include "eslab/theory.hpp"

namespace eslab::cli {
namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::string msg = "invalid scenario";
  for (const std::string& i : issues) msg += "\n  " + i;
  return msg;
}

// Walks one JSON object, collecting type and range problems instead of
// stopping at the first one. Keys that were never asked for are reported as
// unknown by finish(), which catches misspelt fields.
class Reader {
 public:
  Reader(const json* node, std::string path, std::vector<std::string>& issues)
      : node_(node), path_(std::move(path)), issues_(issues) {
    if (node_ && !node_->is_object()) {
      issues_.push_back(path_ + ": expected an object");
      node_ = nullptr;
    }
  }

  bool present() const { return node_ != nullptr; }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_ && node_->contains(key);
  }

  Reader child(const std::string& key) {
    if (!has(key)) return Reader(nullptr, where(key), issues_);
    return Reader(&node_->at(key), where(key), issues_);
  }

  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_number()) return fail<double>(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) return fail<double>(key, "must be finite");
    return x;
  }

  std::optional<std::uint64_t> unsigned_int(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_number_unsigned()) return fail<std::uint64_t>(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::optional<bool> boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_boolean()) return fail<bool>(key, "expected true or false");
    return v.get<bool>();
  }

  std::optional<std::string> text(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_string()) return fail<std::string>(key, "expected a string");
    return v.get<std::string>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_array()) return fail<std::vector<double>>(key, "expected an array of numbers");
    std::vector<double> out;
    for (const json& x : v) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        return fail<std::vector<double>>(key, "expected an array of finite numbers");
      }
      out.push_back(x.get<double>());
    }
    return out;
  }

  std::optional<std::vector<std::uint64_t>> unsigned_ints(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_array()) return fail<std::vector<std::uint64_t>>(key, "expected an array of integers");
    std::vector<std::uint64_t> out;
    for (const json& x : v) {
      if (!x.is_number_unsigned()) {
        return fail<std::vector<std::uint64_t>>(key, "expected an array of non-negative integers");
      }
      out.push_back(x.get<std::uint64_t>());
    }
    return out;
  }

  std::optional<std::vector<std::string>> texts(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_array()) return fail<std::vector<std::string>>(key, "expected an array of strings");
    std::vector<std::string> out;
    for (const json& x : v) {
      if (!x.is_string()) return fail<std::vector<std::string>>(key, "expected an array of strings");
      out.push_back(x.get<std::string>());
    }
    return out;
  }

  std::optional<std::map<std::string, double>> number_map(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const json& v = node_->at(key);
    if (!v.is_object()) return fail<std::map<std::string, double>>(key, "expected an object of numbers");
    std::map<std::string, double> out;
    for (const auto& [k, x] : v.items()) {
      if (!x.is_number()) {
        return fail<std::map<std::string, double>>(key + "." + k, "expected a number");
      }
      out[k] = x.get<double>();
    }
    return out;
  }

  const json* raw(const std::string& key) {
    if (!has(key)) return nullptr;
    return &node_->at(key);
  }

  void issue(const std::string& key, const std::string& problem) {
    issues_.push_back(where(key) + ": " + problem);
  }

  void finish() {
    if (!node_) return;
    for (const auto& [k, v] : node_->items()) {
      if (!seen_.count(k)) issues_.push_back(where(k) + ": unknown field");
    }
  }

  const std::string& path() const { return path_; }

 private:
  template <class T>
  std::optional<T> fail(const std::string& key, const std::string& problem) {
    issue(key, problem);
    return std::nullopt;
  }

  std::string where(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  const json* node_;
  std::string path_;
  std::vector<std::string>& issues_;
  std::set<std::string> seen_;
};

std::optional<LandscapeKind> parse_kind(const std::string& s) {
  if (s == "flat") return LandscapeKind::flat;
  if (s == "linear") return LandscapeKind::linear;
  if (s == "quadratic") return LandscapeKind::quadratic;
  return std::nullopt;
}

std::optional<Method> parse_method(const std::string& s) {
  if (s == "es") return Method::es;
  if (s == "gd") return Method::gd;
  if (s == "ou") return Method::ou;
  return std::nullopt;
}

const char* to_text(ZScoreDenominator z) {
  return z == ZScoreDenominator::population ? "population" : "unbiased";
}

const char* to_text(BasisMode b) {
  return b == BasisMode::canonical ? "canonical" : "random_rotation";
}

const std::set<std::string>& known_checks() {
  static const std::set<std::string> checks{
      "drift",          "drift_fit",      "projection_mean", "projection_variance",
      "flat_variance_slope", "gd_projection", "gd_sq",      "hierarchy_diff",
      "cosine_band",    "barrier"};
  return checks;
}

void parse_landscape(Reader r, LandscapeSpec& out, std::vector<std::string>& issues) {
  if (!r.present()) {
    issues.push_back("landscape: required section missing");
    return;
  }
  if (auto kind = r.text("kind")) {
    if (auto k = parse_kind(*kind)) {
      out.kind = *k;
    } else {
      r.issue("kind", "must be flat, linear or quadratic");
    }
  } else {
    r.issue("kind", "required");
  }
  if (auto d = r.unsigned_int("dimension")) {
    out.dimension = *d;
    if (*d == 0) r.issue("dimension", "must be positive");
  } else {
    r.issue("dimension", "required");
  }
  if (auto c = r.number("constant")) out.constant = *c;
  if (auto s = r.number("sigma_xi")) {
    out.sigma_xi = *s;
    if (*s < 0.0) r.issue("sigma_xi", "must be >= 0");
  }
  if (auto b = r.text("basis")) {
    if (*b == "canonical") {
      out.basis = BasisMode::canonical;
    } else if (*b == "random_rotation") {
      out.basis = BasisMode::random_rotation;
    } else {
      r.issue("basis", "must be canonical or random_rotation");
    }
  }
  if (auto s = r.unsigned_int("rotation_seed")) out.rotation_seed = *s;

  Reader v = r.child("v");
  if (v.present()) {
    out.v.values = v.numbers("values");
    out.v.norm = v.number("norm");
    if (auto dir = v.text("direction")) out.v.direction = *dir;
    if (auto a = v.unsigned_int("axis")) out.v.axis = *a;
    if (auto s = v.unsigned_int("seed")) out.v.seed = *s;
    if (out.v.values.has_value() == out.v.norm.has_value()) {
      v.issue("values", "give exactly one of values or norm");
    }
    if (out.v.values && out.v.values->size() != out.dimension) {
      v.issue("values", "length must equal landscape.dimension");
    }
    if (out.v.norm && *out.v.norm < 0.0) v.issue("norm", "must be >= 0");
    if (out.v.direction != "uniform" && out.v.direction != "axis" && out.v.direction != "random") {
      v.issue("direction", "must be uniform, axis or random");
    }
    if (out.v.direction == "axis" && out.v.axis >= out.dimension) {
      v.issue("axis", "must be below landscape.dimension");
    }
    v.finish();
  } else if (out.kind == LandscapeKind::linear) {
    r.issue("v", "required for a linear landscape");
  }

  Reader sp = r.child("spectrum");
  if (sp.present()) {
    SpectrumSpec& s = out.spectrum;
    s.values = sp.numbers("values");
    if (auto rank = sp.unsigned_int("rank")) s.rank = *rank;
    s.value = sp.number("value");
    if (const json* blocks = sp.raw("blocks")) {
      if (!blocks->is_array()) {
        sp.issue("blocks", "expected an array");
      } else {
        for (std::size_t i = 0; i < blocks->size(); ++i) {
          Reader b(&blocks->at(i), sp.path() + ".blocks[" + std::to_string(i) + "]", issues);
          SpectrumBlock block;
          if (auto val = b.number("value")) block.value = *val; else b.issue("value", "required");
          if (auto c = b.unsigned_int("count")) block.count = *c; else b.issue("count", "required");
          b.finish();
          s.blocks.push_back(block);
        }
      }
    }
    Reader u = sp.child("uniform");
    if (u.present()) {
      UniformSpectrum us;
      if (auto lo = u.number("low")) us.low = *lo;
      if (auto hi = u.number("high")) us.high = *hi;
      if (auto seed = u.unsigned_int("seed")) us.seed = *seed;
      if (!(us.low <= us.high)) u.issue("high", "must be >= low");
      u.finish();
      s.uniform = us;
    }
    const int forms = int(s.values.has_value()) + int(s.rank.has_value() || s.value.has_value()) +
                      int(!s.blocks.empty()) + int(s.uniform.has_value());
    if (forms != 1) sp.issue("values", "give exactly one of values, rank+value, blocks or uniform");
    if (s.values && s.values->size() != out.dimension) {
      sp.issue("values", "length must equal landscape.dimension");
    }
    if (s.rank.has_value() != s.value.has_value()) sp.issue("rank", "rank and value go together");
    if (s.rank && *s.rank > out.dimension) sp.issue("rank", "must not exceed landscape.dimension");
    std::size_t total = 0;
    for (const SpectrumBlock& b : s.blocks) total += b.count;
    if (total > out.dimension) sp.issue("blocks", "counts exceed landscape.dimension");
    sp.finish();
  } else if (out.kind == LandscapeKind::quadratic) {
    r.issue("spectrum", "required for a quadratic landscape");
  }
  r.finish();
}

void parse_initial(Reader r, InitialSpec& out, std::size_t dimension) {
  if (!r.present()) return;
  out.values = r.numbers("values");
  if (auto f = r.number("fill")) out.fill = *f;
  out.active_fill = r.number("active_fill");
  if (out.values && out.values->size() != dimension) {
    r.issue("values", "length must equal landscape.dimension");
  }
  r.finish();
}

void parse_optimizer(Reader r, OptimizerSection& out, const LandscapeSpec& land,
                     std::vector<std::string>& issues) {
  if (!r.present()) {
    issues.push_back("optimizer: required section missing");
    return;
  }
  if (auto m = r.text("method")) {
    if (auto method = parse_method(*m)) out.method = *method; else r.issue("method", "must be es, gd or ou");
  } else {
    r.issue("method", "required");
  }
  if (auto s = r.number("sigma")) out.sigma = *s;
  out.alpha = r.number("alpha");
  if (auto n = r.unsigned_int("population")) out.population = *n;
  if (auto z = r.text("zscore")) {
    if (*z == "population") {
      out.zscore = ZScoreDenominator::population;
    } else if (*z == "unbiased") {
      out.zscore = ZScoreDenominator::unbiased;
    } else {
      r.issue("zscore", "must be population or unbiased");
    }
  }
  out.beta = r.number("beta");
  out.sigma_r_fixed = r.number("sigma_r_fixed");
  if (auto b = r.boolean("noiseless")) out.noiseless = *b;
  if (auto t = r.unsigned_int("steps")) out.steps = *t;
  if (auto t = r.unsigned_int("trials")) out.trials = *t;
  if (auto s = r.unsigned_int("seed")) out.seed = *s;

  Reader rec = r.child("record");
  if (rec.present()) {
    if (const json* all = rec.raw("directions"); all && all->is_string()) {
      if (*all == "all") {
        out.record.directions.resize(land.dimension);
        for (std::size_t k = 0; k < land.dimension; ++k) out.record.directions[k] = k;
      } else {
        rec.issue("directions", "expected an index list or \"all\"");
      }
    } else if (auto dirs = rec.unsigned_ints("directions")) {
      out.record.directions.assign(dirs->begin(), dirs->end());
      for (auto k : *dirs) {
        if (k >= land.dimension) rec.issue("directions", "index must be below landscape.dimension");
      }
    }
    if (auto s = rec.unsigned_int("projection_stride")) out.record.projection_stride = *s;
    if (auto k = rec.boolean("keep_final")) out.record.keep_final = *k;
    if (out.record.projection_stride == 0) rec.issue("projection_stride", "must be positive");
    rec.finish();
  }

  if (out.trials == 0) r.issue("trials", "must be positive");
  if (out.alpha && !(*out.alpha > 0.0)) r.issue("alpha", "must be positive");
  if (out.beta && !(*out.beta > 0.0)) r.issue("beta", "must be positive");
  if (out.sigma_r_fixed && !(*out.sigma_r_fixed > 0.0)) r.issue("sigma_r_fixed", "must be positive");
  const bool es_like = out.method == Method::es || out.method == Method::ou;
  if (es_like) {
    if (!(out.sigma > 0.0)) r.issue("sigma", "must be positive");
    if (out.method == Method::es && out.population < 2) r.issue("population", "must be at least 2");
    if (out.method == Method::ou && out.population < 1) r.issue("population", "must be positive");
  }
  if (out.method == Method::gd && !out.beta) r.issue("beta", "required for gd");
  if (out.method == Method::ou && land.kind != LandscapeKind::quadratic) {
    r.issue("method", "ou needs a quadratic landscape");
  }
  r.finish();
}

void parse_analysis(Reader r, AnalysisSection& out) {
  if (!r.present()) return;
  if (auto f = r.boolean("fit")) out.fit = *f;
  Reader interp = r.child("interpolate");
  if (interp.present()) {
    if (auto p = interp.unsigned_int("points")) out.interpolate_points = *p;
    if (out.interpolate_points < 2) interp.issue("points", "must be at least 2");
    interp.finish();
  }
  Reader probe = r.child("probe");
  if (probe.present()) {
    if (auto m = probe.numbers("magnitudes")) out.probe_magnitudes = *m;
    if (auto s = probe.unsigned_ints("random_seeds")) out.probe_random_seeds = *s;
    probe.finish();
  }
  Reader hier = r.child("hierarchy");
  if (hier.present()) {
    if (auto t = hier.unsigned_int("trials")) {
      out.hierarchy_trials = *t;
      if (*t == 0) hier.issue("trials", "must be positive");
    }
    hier.finish();
  }
  r.finish();
}

void parse_validation(Reader r, ValidationSection& out) {
  if (!r.present()) return;
  if (auto c = r.texts("checks")) {
    out.checks = *c;
    for (const std::string& name : *c) {
      if (!known_checks().count(name)) r.issue("checks", "unknown check '" + name + "'");
    }
  }
  if (auto t = r.number_map("tolerances")) out.tolerances = *t;
  if (auto t = r.unsigned_ints("times")) out.times.assign(t->begin(), t->end());
  if (auto o = r.number_map("prediction_overrides")) {
    out.prediction_overrides = *o;
    static const std::set<std::string> allowed{"alpha", "sigma", "population", "sigma_xi",
                                               "beta", "sigma_r_fixed"};
    for (const auto& [k, v] : *o) {
      if (!allowed.count(k)) r.issue("prediction_overrides." + k, "not an overridable parameter");
    }
  }
  r.finish();
}

json vector_json(const std::vector<double>& v) { return json(v); }

}  // namespace

ScenarioError::ScenarioError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::string to_string(Method method) {
  switch (method) {
    case Method::es: return "es";
    case Method::gd: return "gd";
    case Method::ou: return "ou";
  }
  return "unknown";
}

Scenario parse_scenario(const json& doc) {
  std::vector<std::string> issues;
  Scenario s;
  Reader root(&doc, "", issues);
  if (!root.present()) throw ScenarioError(issues);
  if (auto n = root.text("name")) s.name = *n;
  parse_landscape(root.child("landscape"), s.landscape, issues);
  parse_initial(root.child("initial"), s.initial, s.landscape.dimension);
  parse_optimizer(root.child("optimizer"), s.optimizer, s.landscape, issues);
  parse_analysis(root.child("analysis"), s.analysis);
  parse_validation(root.child("validation"), s.validation);
  Reader out = root.child("output");
  if (out.present()) {
    if (auto dir = out.text("directory")) s.output_directory = *dir;
    out.finish();
  }
  root.finish();
  if (!issues.empty()) throw ScenarioError(issues);
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError({path.string() + ": cannot open scenario file"});
  json doc;
  try {
    doc = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ScenarioError({path.string() + ": " + e.what()});
  }
  return parse_scenario(doc);
}

json to_json(const Scenario& s) {
  json doc;
  doc["name"] = s.name;

  const LandscapeSpec& l = s.landscape;
  json land;
  land["kind"] = to_string(l.kind);
  land["dimension"] = l.dimension;
  land["constant"] = l.constant;
  land["sigma_xi"] = l.sigma_xi;
  land["basis"] = to_text(l.basis);
  land["rotation_seed"] = l.rotation_seed;
  if (l.v.values || l.v.norm) {
    json v;
    if (l.v.values) v["values"] = vector_json(*l.v.values);
    if (l.v.norm) v["norm"] = *l.v.norm;
    v["direction"] = l.v.direction;
    v["axis"] = l.v.axis;
    v["seed"] = l.v.seed;
    land["v"] = v;
  }
  const SpectrumSpec& sp = l.spectrum;
  if (sp.values || sp.rank || sp.value || !sp.blocks.empty() || sp.uniform) {
    json spec = json::object();
    if (sp.values) spec["values"] = vector_json(*sp.values);
    if (sp.rank) spec["rank"] = *sp.rank;
    if (sp.value) spec["value"] = *sp.value;
    if (!sp.blocks.empty()) {
      json blocks = json::array();
      for (const SpectrumBlock& b : sp.blocks) blocks.push_back({{"value", b.value}, {"count", b.count}});
      spec["blocks"] = blocks;
    }
    if (sp.uniform) {
      spec["uniform"] = {{"low", sp.uniform->low}, {"high", sp.uniform->high}, {"seed", sp.uniform->seed}};
    }
    land["spectrum"] = spec;
  }
  doc["landscape"] = land;

  json init;
  if (s.initial.values) init["values"] = vector_json(*s.initial.values);
  init["fill"] = s.initial.fill;
  if (s.initial.active_fill) init["active_fill"] = *s.initial.active_fill;
  doc["initial"] = init;

  const OptimizerSection& o = s.optimizer;
  json opt;
  opt["method"] = to_string(o.method);
  opt["sigma"] = o.sigma;
  if (o.alpha) opt["alpha"] = *o.alpha;
  opt["population"] = o.population;
  opt["zscore"] = to_text(o.zscore);
  if (o.beta) opt["beta"] = *o.beta;
  if (o.sigma_r_fixed) opt["sigma_r_fixed"] = *o.sigma_r_fixed;
  opt["noiseless"] = o.noiseless;
  opt["steps"] = o.steps;
  opt["trials"] = o.trials;
  opt["seed"] = o.seed;
  opt["record"] = {{"directions", o.record.directions},
                   {"projection_stride", o.record.projection_stride},
                   {"keep_final", o.record.keep_final}};
  doc["optimizer"] = opt;

  const AnalysisSection& a = s.analysis;
  json an;
  an["fit"] = a.fit;
  an["interpolate"] = {{"points", a.interpolate_points}};
  an["probe"] = {{"magnitudes", a.probe_magnitudes}, {"random_seeds", a.probe_random_seeds}};
  if (a.hierarchy_trials) an["hierarchy"] = {{"trials", *a.hierarchy_trials}};
  doc["analysis"] = an;

  const ValidationSection& v = s.validation;
  doc["validation"] = {{"checks", v.checks},
                       {"tolerances", v.tolerances},
                       {"times", v.times},
                       {"prediction_overrides", v.prediction_overrides}};
  doc["output"] = {{"directory", s.output_directory}};
  return doc;
}

std::string scenario_hash(const Scenario& scenario) {
  // Where results are written does not change them.
  json doc = to_json(scenario);
  doc.erase("output");
  const std::string text = doc.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex;
  os.width(16);
  os.fill('0');
  os << h;
  return os.str();
}

// --- materialisation ----------------------------------------------------------

std::vector<double> build_spectrum(const LandscapeSpec& spec) {
  const std::size_t d = spec.dimension;
  const SpectrumSpec& s = spec.spectrum;
  if (s.values) return *s.values;
  std::vector<double> out(d, 0.0);
  if (s.rank && s.value) {
    std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(*s.rank), *s.value);
  } else if (!s.blocks.empty()) {
    std::size_t k = 0;
    for (const SpectrumBlock& b : s.blocks) {
      for (std::size_t i = 0; i < b.count; ++i) out[k++] = b.value;
    }
  } else if (s.uniform) {
    std::mt19937_64 engine(s.uniform->seed);
    std::uniform_real_distribution<double> dist(s.uniform->low, s.uniform->high);
    for (double& x : out) x = dist(engine);
  }
  return out;
}

std::vector<double> build_v(const LandscapeSpec& spec) {
  const std::size_t d = spec.dimension;
  if (spec.v.values) return *spec.v.values;
  const double norm = spec.v.norm.value_or(0.0);
  std::vector<double> v(d, 0.0);
  if (spec.v.direction == "axis") {
    v[spec.v.axis] = norm;
  } else if (spec.v.direction == "random") {
    Rng rng(spec.v.seed);
    v = random_unit_direction(d, rng);
    for (double& x : v) x *= norm;
  } else {
    const double each = norm / std::sqrt(static_cast<double>(d));
    std::fill(v.begin(), v.end(), each);
  }
  return v;
}

Landscape build_landscape(const LandscapeSpec& spec) {
  switch (spec.kind) {
    case LandscapeKind::flat: return FlatLandscape(spec.dimension, spec.constant);
    case LandscapeKind::linear: return LinearLandscape(build_v(spec));
    case LandscapeKind::quadratic:
      if (spec.basis == BasisMode::random_rotation) {
        return QuadraticLandscape(build_spectrum(spec), spec.rotation_seed);
      }
      return QuadraticLandscape(build_spectrum(spec));
  }
  throw std::logic_error("unhandled landscape kind");
}

Vector initial_coordinates(const Scenario& scenario, const std::vector<double>& spectrum) {
  const InitialSpec& init = scenario.initial;
  if (init.values) return *init.values;
  Vector c(scenario.landscape.dimension, init.fill);
  if (init.active_fill && !spectrum.empty()) {
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (spectrum[k] != 0.0) c[k] = *init.active_fill;
    }
  }
  return c;
}

Vector build_initial(const Scenario& scenario, const Landscape& landscape) {
  if (const auto* q = landscape.as_quadratic()) {
    return q->from_eigenbasis(initial_coordinates(scenario, q->eigenvalues()));
  }
  return initial_coordinates(scenario, {});
}

NoiseModel noise_model(const Scenario& scenario) { return {scenario.landscape.sigma_xi}; }

double resolved_alpha(const OptimizerSection& opt) { return opt.alpha.value_or(opt.sigma / 2.0); }

double reward_std_at_start(const Scenario& scenario) {
  const LandscapeSpec& l = scenario.landscape;
  const double sigma = scenario.optimizer.sigma;
  switch (l.kind) {
    case LandscapeKind::flat:
      if (!(l.sigma_xi > 0.0)) throw std::invalid_argument("degenerate reward distribution");
      return l.sigma_xi;
    case LandscapeKind::linear: {
      double norm = 0.0;
      if (l.v.norm) {
        norm = *l.v.norm;
      } else {
        for (double x : *l.v.values) norm += x * x;
        norm = std::sqrt(norm);
      }
      return theory::sigma_r_linear(sigma, norm, l.sigma_xi);
    }
    case LandscapeKind::quadratic: {
      const std::vector<double> spectrum = build_spectrum(l);
      const Vector coords = initial_coordinates(scenario, spectrum);
      double v2 = 0.0;
      double trace = 0.0;
      for (std::size_t k = 0; k < spectrum.size(); ++k) {
        const double vk = spectrum[k] * coords[k];
        v2 += vk * vk;
        trace += spectrum[k] * spectrum[k];
      }
      return theory::sigma_r_quadratic(sigma, std::sqrt(v2), trace, l.sigma_xi);
    }
  }
  throw std::logic_error("unhandled landscape kind");
}

EsConfig es_config(const Scenario& scenario) {
  const OptimizerSection& o = scenario.optimizer;
  EsConfig cfg;
  cfg.sigma = o.sigma;
  cfg.alpha = resolved_alpha(o);
  cfg.population = o.population;
  cfg.zscore = o.zscore;
  cfg.seed = o.seed;
  return cfg;
}

GdConfig gd_config(const Scenario& scenario) {
  const OptimizerSection& o = scenario.optimizer;
  if (!o.beta) throw ScenarioError({"optimizer.beta: required for gradient descent"});
  GdConfig cfg;
  cfg.beta = *o.beta;
  cfg.steps = o.steps;
  return cfg;
}

OuConfig ou_config(const Scenario& scenario) {
  const OptimizerSection& o = scenario.optimizer;
  OuConfig cfg;
  cfg.sigma = o.sigma;
  cfg.alpha = resolved_alpha(o);
  cfg.population = o.population;
  cfg.noiseless = o.noiseless;
  cfg.seed = o.seed;
  cfg.sigma_r_fixed = o.sigma_r_fixed ? *o.sigma_r_fixed : reward_std_at_start(scenario);
  return cfg;
}

OptimizerSpec optimizer_spec(const Scenario& scenario) {
  switch (scenario.optimizer.method) {
    case Method::es: return es_config(scenario);
    case Method::gd: return gd_config(scenario);
    case Method::ou: return ou_config(scenario);
  }
  throw std::logic_error("unhandled method");
}

}  // namespace eslab::cli
