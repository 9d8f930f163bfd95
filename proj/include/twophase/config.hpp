#pragma once

// Run configuration: YAML file with sections materials, geometry, task and output.
// Unknown keys are errors; every value read is echoed into an ordered JSON tree that
// the manifest hashes.

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include <json.hpp>

#include "twophase/equilibria.hpp"
#include "twophase/error.hpp"
#include "twophase/radial.hpp"
#include "twophase/thermo.hpp"

namespace twophase {

namespace detail {

[[noreturn]] inline void config_error(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::ConfigError, (path.empty() ? std::string("<root>") : path) + ": " + msg);
}

inline std::string join_path(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

/// One mapping node of the config; tracks which keys were read so leftovers can be rejected.
class Section {
 public:
  Section(YAML::Node node, std::string path, nlohmann::ordered_json* echo)
      : node_(std::move(node)), path_(std::move(path)), echo_(echo) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) config_error(path_, "expected a mapping");
  }

  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  template <class T>
  T get(const std::string& key, const T& fallback) {
    if (auto v = opt<T>(key)) return *v;
    return record(key, fallback);
  }

  template <class T>
  std::optional<T> opt(const std::string& key) {
    used_.insert(key);
    if (!has(key)) return std::nullopt;
    const YAML::Node v = node_[key];
    try {
      return record(key, v.as<T>());
    } catch (const YAML::Exception&) {
      config_error(join_path(path_, key), "wrong value type");
    }
  }

  template <class T>
  T require(const std::string& key) {
    auto v = opt<T>(key);
    if (!v) config_error(join_path(path_, key), "missing required key");
    return *v;
  }

  Section sub(const std::string& key) {
    used_.insert(key);
    nlohmann::ordered_json* child = nullptr;
    if (echo_) {
      (*echo_)[key] = nlohmann::ordered_json::object();
      child = &(*echo_)[key];
    }
    return Section(has(key) ? node_[key] : YAML::Node(), join_path(path_, key), child);
  }

  /// Throws on keys that were never read.
  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!used_.count(k)) config_error(join_path(path_, k), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

 private:
  template <class T>
  const T& record(const std::string& key, const T& v) {
    if (echo_) (*echo_)[key] = v;
    return v;
  }

  YAML::Node node_;
  std::string path_;
  nlohmann::ordered_json* echo_;
  std::set<std::string> used_;
};

inline Polynomial read_coefficient(Section s, double fallback) {
  const std::string family = s.get<std::string>("family", "constant");
  Polynomial p;
  if (family == "constant") {
    p = Polynomial::constant(s.get<double>("value", fallback));
  } else if (family == "affine") {
    const double c0 = s.require<double>("c0");
    p = Polynomial::affine(c0, s.require<double>("c1"));
  } else {
    config_error(join_path(s.path(), "family"), "unknown family '" + family + "' (constant, affine)");
  }
  s.finish();
  return p;
}

inline PhaseLaw read_phase(Section s, const PhaseLaw& fallback) {
  PhaseLaw p;
  p.rho = s.get<double>("density", fallback.rho);
  Section f = s.sub("free_energy");
  const std::string family = f.get<std::string>("family", "log");
  if (family != "log") config_error(join_path(f.path(), "family"), "unknown family '" + family + "' (log)");
  const double a = f.get<double>("a", fallback.psi.a());
  const double b = f.get<double>("b", fallback.psi.b());
  const double c = f.get<double>("c", fallback.psi.c());
  f.finish();
  p.psi = FreeEnergy(a, b, c);
  p.mu = read_coefficient(s.sub("viscosity"), fallback.mu(1.0));
  p.d = read_coefficient(s.sub("conductivity"), fallback.d(1.0));
  s.finish();
  return p;
}

inline SurfaceLaw read_surface(Section s) {
  Section t = s.sub("tension");
  const std::string family = t.get<std::string>("family", "quadratic");
  Polynomial sigma;
  if (family == "quadratic") {
    const double s0 = t.get<double>("sigma0", 1.0);
    const double tc = t.get<double>("theta_c", 2.0);
    if (!(s0 > 0.0) || !(tc > 0.0)) config_error(t.path(), "sigma0 and theta_c must be positive");
    sigma = Polynomial::quadratic_surface_tension(s0, tc);
  } else if (family == "polynomial") {
    sigma = Polynomial(t.require<std::vector<double>>("coefficients"));
  } else {
    config_error(join_path(t.path(), "family"), "unknown family '" + family + "' (quadratic, polynomial)");
  }
  t.finish();
  Polynomial dGamma = read_coefficient(s.sub("conductivity"), 1.0);
  Polynomial gamma = read_coefficient(s.sub("kinetic"), 0.1);
  s.finish();
  return SurfaceLaw::make(std::move(sigma), std::move(dGamma), std::move(gamma));
}

}  // namespace detail

struct GeometryConfig {
  Domain domain{3, 2.0};
  std::vector<Point> centers{Point{0.0, 0.0, 0.0}};
  std::optional<double> R_star, mass;
  std::optional<double> theta_star, energy;

  int m() const { return static_cast<int>(centers.size()); }
};

struct SpectrumTask {
  int l_max = 6;
  int nodes = 48;
  int lambda_points = 64;
  double lambda_min = 1e-4;
  double lambda_max = 1e3;
};

struct VariationsTask {
  int l_max = 8;
};

struct RadialTask {
  int inner_cells = 32;
  int outer_cells = 32;
  double dt = 5e-3;
  int steps = 2000;
  int record_every = 10;
  RadialProfile profile = RadialProfile::Cosine;
  double amplitude = 0.3;
  double newton_tol = 1e-13;
  int newton_max_iterations = 30;
};

struct RipeningTask {
  std::vector<double> radii;  // empty: R_* (1 + perturbation s_k) with s_k centred on zero
  double perturbation = 0.02;
  double horizon = 50.0;
  double dt0 = 1e-3;
  double R_min = -1.0;
  double rtol = 1e-10;
  double atol = 1e-14;
};

struct SuiteTask {
  std::string name = "acceptance";
  int seed = 2024;
};

struct OutputConfig {
  std::string directory = "out";
  bool csv = true;
  bool json = true;
};

struct RunConfig {
  MaterialSet materials = default_materials();
  GeometryConfig geometry;
  SpectrumTask spectrum;
  VariationsTask variations;
  RadialTask radial;
  RipeningTask ripening;
  SuiteTask suite;
  OutputConfig output;
  nlohmann::ordered_json effective;  // normalized echo of every value used
};

/// Applies `key.path=value` to the tree; the value is parsed as YAML (so lists work).
inline void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) detail::config_error(assignment, "override must be key.path=value");
  const std::string path = assignment.substr(0, eq);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    detail::config_error(path, std::string("unparsable override value: ") + e.what());
  }
  std::vector<std::string> parts;
  std::stringstream ss(path);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) detail::config_error(path, "empty path component");
    parts.push_back(p);
  }
  // yaml-cpp nodes are handles; walk with reset() so assignments do not alias parents.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node cur = chain.back();
    if (cur.IsScalar() || cur.IsSequence()) detail::config_error(path, "'" + parts[i] + "' is not a section");
    YAML::Node next = cur[parts[i]];
    if (!next || next.IsNull()) {
      cur[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = cur[parts[i]];
    }
    chain.push_back(next);
  }
  YAML::Node last = chain.back();
  if (last.IsScalar() || last.IsSequence()) detail::config_error(path, "parent is not a section");
  last[parts.back()] = value;
}

inline RunConfig parse_config(const YAML::Node& root) {
  if (root && !root.IsNull() && !root.IsMap()) detail::config_error("", "top level must be a mapping");
  RunConfig cfg;
  nlohmann::ordered_json& echo = cfg.effective;
  echo = nlohmann::ordered_json::object();
  detail::Section top(root, "", &echo);

  {
    detail::Section m = top.sub("materials");
    const MaterialSet def = default_materials();
    cfg.materials.phase1 = detail::read_phase(m.sub("phase1"), def.phase1);
    cfg.materials.phase2 = detail::read_phase(m.sub("phase2"), def.phase2);
    try {
      cfg.materials.surface = detail::read_surface(m.sub("surface"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::ConfigError) throw;
      detail::config_error("materials.surface.tension", e.what());
    }
    m.finish();
  }
  {
    detail::Section g = top.sub("geometry");
    GeometryConfig& G = cfg.geometry;
    G.domain.n = g.get<int>("n", 3);
    G.domain.R_Omega = g.get<double>("R_Omega", 2.0);
    if (G.domain.n != 2 && G.domain.n != 3) detail::config_error("geometry.n", "must be 2 or 3");
    if (!(G.domain.R_Omega > 0.0)) detail::config_error("geometry.R_Omega", "must be positive");
    const int m = g.get<int>("m", 1);
    if (m < 1) detail::config_error("geometry.m", "must be at least 1");
    if (g.has("centers")) {
      const auto rows = g.require<std::vector<std::vector<double>>>("centers");
      if (static_cast<int>(rows.size()) != m) detail::config_error("geometry.centers", "need exactly m centres");
      G.centers.clear();
      for (const auto& r : rows) {
        if (static_cast<int>(r.size()) != G.domain.n) detail::config_error("geometry.centers", "need n coordinates");
        G.centers.push_back(Point{r[0], r[1], r.size() > 2 ? r[2] : 0.0});
      }
    } else {
      G.centers = ring_centers(m, g.get<double>("ring_radius", m == 1 ? 0.0 : 0.5 * G.domain.R_Omega));
    }
    G.mass = g.opt<double>("mass");
    G.R_star = g.opt<double>("R_star");
    if (G.mass && G.R_star) detail::config_error("geometry", "give either mass or R_star, not both");
    if (!G.mass && !G.R_star) G.R_star = g.get<double>("R_star", 0.5);
    G.energy = g.opt<double>("energy");
    G.theta_star = g.opt<double>("theta_star");
    if (G.energy && G.theta_star) detail::config_error("geometry", "give either energy or theta_star, not both");
    if (!G.energy && !G.theta_star) G.theta_star = g.get<double>("theta_star", 1.0);
    g.finish();
  }
  {
    detail::Section t = top.sub("task");
    {
      detail::Section s = t.sub("spectrum");
      SpectrumTask& S = cfg.spectrum;
      S.l_max = s.get<int>("l_max", S.l_max);
      S.nodes = s.get<int>("nodes", S.nodes);
      S.lambda_points = s.get<int>("lambda_points", S.lambda_points);
      S.lambda_min = s.get<double>("lambda_min", S.lambda_min);
      S.lambda_max = s.get<double>("lambda_max", S.lambda_max);
      if (S.l_max < 0) detail::config_error("task.spectrum.l_max", "must be nonnegative");
      if (S.nodes < 8) detail::config_error("task.spectrum.nodes", "at least 8 nodes per interval");
      if (S.lambda_points < 2 || !(S.lambda_min > 0.0) || !(S.lambda_max > S.lambda_min))
        detail::config_error("task.spectrum", "need lambda_points >= 2 and 0 < lambda_min < lambda_max");
      s.finish();
    }
    {
      detail::Section s = t.sub("variations");
      cfg.variations.l_max = s.get<int>("l_max", cfg.variations.l_max);
      if (cfg.variations.l_max < 1) detail::config_error("task.variations.l_max", "must be at least 1");
      s.finish();
    }
    {
      detail::Section s = t.sub("radial");
      RadialTask& R = cfg.radial;
      R.inner_cells = s.get<int>("inner_cells", R.inner_cells);
      R.outer_cells = s.get<int>("outer_cells", R.outer_cells);
      R.dt = s.get<double>("dt", R.dt);
      R.steps = s.get<int>("steps", R.steps);
      R.record_every = s.get<int>("record_every", R.record_every);
      const std::string prof = s.get<std::string>("profile", "cosine");
      if (prof == "two_constant") R.profile = RadialProfile::TwoConstant;
      else if (prof == "cosine") R.profile = RadialProfile::Cosine;
      else if (prof == "central_spot") R.profile = RadialProfile::CentralSpot;
      else detail::config_error("task.radial.profile", "unknown profile '" + prof + "' (two_constant, cosine, central_spot)");
      R.amplitude = s.get<double>("amplitude", R.amplitude);
      R.newton_tol = s.get<double>("newton_tol", R.newton_tol);
      R.newton_max_iterations = s.get<int>("newton_max_iterations", R.newton_max_iterations);
      if (R.inner_cells < 2 || R.outer_cells < 2) detail::config_error("task.radial", "need at least 2 cells per phase");
      if (!(R.dt > 0.0) || R.steps < 0 || R.record_every < 1)
        detail::config_error("task.radial", "need dt > 0, steps >= 0, record_every >= 1");
      s.finish();
    }
    {
      detail::Section s = t.sub("ripening");
      RipeningTask& P = cfg.ripening;
      if (s.has("radii")) P.radii = s.require<std::vector<double>>("radii");
      P.perturbation = s.get<double>("perturbation", P.perturbation);
      P.horizon = s.get<double>("horizon", P.horizon);
      P.dt0 = s.get<double>("dt0", P.dt0);
      P.R_min = s.get<double>("R_min", P.R_min);
      P.rtol = s.get<double>("rtol", P.rtol);
      P.atol = s.get<double>("atol", P.atol);
      if (!P.radii.empty() && static_cast<int>(P.radii.size()) != cfg.geometry.m())
        detail::config_error("task.ripening.radii", "need one radius per droplet (geometry.m)");
      if (!(P.horizon >= 0.0) || !(P.dt0 > 0.0)) detail::config_error("task.ripening", "need horizon >= 0 and dt0 > 0");
      s.finish();
    }
    {
      detail::Section s = t.sub("suite");
      cfg.suite.name = s.get<std::string>("name", cfg.suite.name);
      if (cfg.suite.name != "acceptance") detail::config_error("task.suite.name", "unknown suite (acceptance)");
      cfg.suite.seed = s.get<int>("seed", cfg.suite.seed);
      s.finish();
    }
    t.finish();
  }
  {
    detail::Section o = top.sub("output");
    cfg.output.directory = o.get<std::string>("directory", cfg.output.directory);
    const auto formats = o.get<std::vector<std::string>>("formats", {"csv", "json"});
    cfg.output.csv = cfg.output.json = false;
    for (const auto& f : formats) {
      if (f == "csv") cfg.output.csv = true;
      else if (f == "json") cfg.output.json = true;
      else detail::config_error("output.formats", "unknown format '" + f + "' (csv, json)");
    }
    o.finish();
  }
  top.finish();
  return cfg;
}

/// Loads a config file (empty path: built-in defaults) and applies overrides in order.
inline RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  YAML::Node root;
  try {
    root = path.empty() ? YAML::Node(YAML::NodeType::Map) : YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    detail::config_error(path, std::string("cannot parse: ") + e.what());
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  for (const auto& o : overrides) apply_override(root, o);
  return parse_config(root);
}

}  // namespace twophase
