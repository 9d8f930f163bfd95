#pragma once

// Subcommand implementations shared by the command-line tool and the acceptance suite.
// Each writes its artifacts through an ArtifactWriter; numerical errors are rethrown with
// the failing operation prepended.

#include <algorithm>
#include <exception>
#include <functional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "twophase/config.hpp"
#include "twophase/io.hpp"
#include "twophase/pencil.hpp"
#include "twophase/radial.hpp"
#include "twophase/ripening.hpp"
#include "twophase/variations.hpp"

namespace twophase {

using Json = nlohmann::ordered_json;

/// Runs f and prefixes any library error with the operation name.
template <class F>
auto in_operation(const std::string& op, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    throw Error(e.code(), op + ": " + e.message());
  }
}

/// Evaluates f(0..count-1) on up to `threads` workers; results keep index order.
template <class T>
std::vector<T> parallel_map(int count, int threads, const std::function<T(int)>& f) {
  std::vector<T> out(static_cast<std::size_t>(std::max(count, 0)));
  std::vector<std::exception_ptr> errors(out.size());
  const int workers = std::clamp(threads, 1, std::max(count, 1));
  auto work = [&](int w) {
    for (int i = w; i < count; i += workers) {
      try {
        out[i] = f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

inline std::string errorcode_name(ErrorCode c) { return std::string(to_string(c)); }

inline Json complex_json(const std::complex<double>& z) { return Json::array({z.real(), z.imag()}); }

/// Equilibrium selected by the geometry section (R_* or mass, theta_* or energy).
inline EquilibriumState configured_equilibrium(const RunConfig& cfg) {
  const MaterialSet& ms = cfg.materials;
  const GeometryConfig& G = cfg.geometry;
  return in_operation("equilibrium", [&] {
    SphereFamily s{G.centers, 0.0};
    s.R = G.R_star ? *G.R_star : radius_from_mass(G.domain, ms, *G.mass, G.m());
    const NondegeneracyReport nd = validate_nondegenerate(s, G.domain);
    if (!nd.ok) throw Error(ErrorCode::ConfigError, "geometry: " + nd.diagnostics.front());
    const double theta = G.theta_star ? *G.theta_star : temperature_from_energy(ms, G.domain, s, *G.energy).theta;
    check_temperature(theta, ms.thetaC());
    return make_equilibrium(ms, G.domain, s, theta);
  });
}

struct CommandResult {
  int exitCode = 0;  // 0 success, 1 checks failed
  std::string summary;
};

// ---------------------------------------------------------------------------------------------
// validate-materials

inline CommandResult run_validate_materials(const RunConfig& cfg, ArtifactWriter& out) {
  const MaterialSet& ms = cfg.materials;
  const std::vector<double> grid = temperature_grid(ms.thetaC(), 200);
  const ValidationReport rep = in_operation("validate_assumptions", [&] { return validate_assumptions(ms, grid); });
  if (cfg.output.csv) {
    CsvTable t({"violation", "phase", "theta", "value"});
    for (const auto& e : rep.entries) t.row() << to_string(e.kind) << e.phase << e.theta << e.value;
    out.write("validation.csv", t.str());
  }
  if (cfg.output.json) {
    Json j;
    j["valid"] = rep.ok();
    j["theta_c"] = ms.thetaC();
    j["grid_points"] = static_cast<int>(grid.size());
    j["violation_count"] = static_cast<int>(rep.entries.size());
    out.write_json("validation.json", j);
  }
  return {rep.ok() ? 0 : 1, rep.ok() ? "material set valid" : std::to_string(rep.entries.size()) + " violations"};
}

// ---------------------------------------------------------------------------------------------
// equilibrium

inline Json equilibrium_record(const RunConfig& cfg, const EquilibriumState& eq) {
  const ConservedTotals t = total_functionals(cfg.materials, eq.domain, eq.spheres, eq.thetaStar);
  Json j;
  j["n"] = eq.n();
  j["m"] = eq.spheres.m();
  j["R_star"] = eq.R();
  j["theta_star"] = eq.thetaStar;
  j["pi1"] = eq.pi1;
  j["pi2"] = eq.pi2;
  j["H_star"] = eq.HStar;
  j["M"] = t.M;
  j["E"] = t.E;
  j["Phi"] = t.Phi;
  return j;
}

inline CommandResult run_equilibrium(const RunConfig& cfg, ArtifactWriter& out) {
  const EquilibriumState eq = configured_equilibrium(cfg);
  const Json j = in_operation("total_functionals", [&] { return equilibrium_record(cfg, eq); });
  if (cfg.output.json) out.write_json("equilibrium.json", j);
  return {0, "R_star = " + format_double(eq.R()) + ", theta_star = " + format_double(eq.thetaStar)};
}

// ---------------------------------------------------------------------------------------------
// variations

inline std::vector<std::string> probe_labels(int n, int m, int Lmax) {
  std::vector<std::string> out;
  for (int phase : {1, 2})
    for (int c = 0; c < n; ++c) out.push_back("v" + std::to_string(phase) + "_" + std::to_string(c));
  out.push_back("theta1");
  out.push_back("theta2");
  const std::vector<int> deg = harmonic_degrees(n, Lmax);
  for (int k = 0; k < m; ++k)
    for (const char* field : {"thetaG", "h"})
      for (std::size_t i = 0; i < deg.size(); ++i) {
        const int idx = static_cast<int>(i) - harmonic_offset(n, deg[i]);
        out.push_back(std::string(field) + std::to_string(k) + "_l" + std::to_string(deg[i]) + "_" +
                      std::to_string(idx));
      }
  return out;
}

inline CommandResult run_variations(const RunConfig& cfg, ArtifactWriter& out) {
  const MaterialSet& ms = cfg.materials;
  const EquilibriumState eq = configured_equilibrium(cfg);
  const int n = eq.n(), m = eq.spheres.m(), Lmax = cfg.variations.l_max;
  const detail::ProbeLayout L{n, m, harmonic_count(n, Lmax)};
  const std::vector<std::string> labels = probe_labels(n, m, Lmax);

  CsvTable t({"label", "constrained", "value"});
  in_operation("second_variation_form", [&] {
    for (int i = 0; i < L.size(); ++i) {
      const Perturbation p = detail::probe(L, Lmax, Eigen::VectorXd::Unit(L.size(), i));
      t.row() << labels[i] << false << second_variation_form(ms, eq, p);
      t.row() << labels[i] << true << second_variation_form(ms, eq, constraint_projection(ms, eq, p));
    }
    return 0;
  });
  const QuadraticFormReport rep = in_operation("classify_definiteness", [&] { return classify_definiteness(ms, eq, Lmax); });
  if (rep.witness) t.row() << "volume_exchange_witness" << true << second_variation_form(ms, eq, *rep.witness);
  const LagrangeReport lag = in_operation("lagrange_residual", [&] { return lagrange_residual(ms, eq); });

  if (cfg.output.csv) out.write("variations.csv", t.str());
  if (cfg.output.json) {
    Json j;
    j["n"] = n;
    j["m"] = m;
    j["l_max"] = Lmax;
    j["classification"] = to_string(rep.classification);
    j["positive_dimension"] = rep.positiveDimension;
    j["zero_dimension"] = rep.zeroDimension;
    j["negative_dimension"] = rep.negativeDimension;
    j["witness_value"] = rep.witness ? Json(rep.value) : Json(nullptr);
    j["lagrange"] = {{"lambda", lag.lambda}, {"mu", lag.mu}, {"residual", lag.residual}};
    Json probes = Json::object();
    for (const auto& [name, v] : lag.probes) probes[name] = v;
    j["lagrange"]["probes"] = probes;
    out.write_json("variations.json", j);
  }
  return {0, to_string(rep.classification)};
}

// ---------------------------------------------------------------------------------------------
// spectrum

struct ModeReport {
  int l = 0;
  std::vector<DispersionSample> samples;
  std::vector<double> roots;
  std::string dispersionStatus = "ok";
  ModeSpectrum direct;
};

inline std::vector<double> lambda_grid(const SpectrumTask& s) {
  return default_lambda_grid(s.lambda_points, s.lambda_min, s.lambda_max);
}

/// Leading eigenvalue away from the lambda = 0 cluster (largest real part with |lambda| > 1e-6).
inline std::optional<std::complex<double>> leading_eigenvalue(const ModeSpectrum& s) {
  for (const auto& x : s.physical)
    if (std::abs(x) > 1e-6) return x;
  return std::nullopt;
}

inline CommandResult run_spectrum(const RunConfig& cfg, ArtifactWriter& out, int threads) {
  const MaterialSet& ms = cfg.materials;
  const EquilibriumState eq = configured_equilibrium(cfg);
  const int m = eq.spheres.m();
  Json j;
  j["n"] = eq.n();
  j["m"] = m;
  j["nodes"] = cfg.spectrum.nodes;

  CsvTable t({"n", "l", "lambda", "F", "dtn", "s11", "s22", "tau"});
  Json modes = Json::array();
  if (m == 1) {
    const LinearizationCoefficients c = in_operation("linearize", [&] { return linearize(ms, eq); });
    const RadialDiscretization disc{cfg.spectrum.nodes, cfg.spectrum.nodes};
    const std::vector<double> grid = lambda_grid(cfg.spectrum);
    const std::vector<double> positiveGrid(grid.begin() + 1, grid.end());
    const std::vector<ModeReport> reports = parallel_map<ModeReport>(cfg.spectrum.l_max + 1, threads, [&](int l) {
      ModeReport r;
      r.l = l;
      if (c.gamma > 0.0) {
        const std::vector<double>& g = l == 0 ? positiveGrid : grid;
        in_operation("assemble_dispersion(l=" + std::to_string(l) + ")", [&] {
          for (double lam : g) r.samples.push_back(assemble_dispersion(c, l, lam, disc));
          return 0;
        });
        r.roots = in_operation("dispersion_roots(l=" + std::to_string(l) + ")",
                               [&] { return dispersion_roots(c, l, g, disc); });
      } else {
        r.dispersionStatus = "skipped: GammaZero";
      }
      r.direct = in_operation("direct_mode_spectrum(l=" + std::to_string(l) + ")",
                              [&] { return direct_mode_spectrum(c, l, disc); });
      return r;
    });
    for (const ModeReport& r : reports) {
      for (const auto& s : r.samples) t.row() << s.n << s.l << s.lambda << s.F << s.dtn << s.s11 << s.s22 << s.tau;
      Json mj;
      mj["l"] = r.l;
      mj["dispersion"] = r.dispersionStatus;
      mj["roots"] = r.roots;
      const auto lead = leading_eigenvalue(r.direct);
      mj["leading_eigenvalue"] = lead ? complex_json(*lead) : Json(nullptr);
      Json ev = Json::array();
      for (std::size_t k = 0; k < std::min<std::size_t>(r.direct.physical.size(), 8); ++k)
        ev.push_back(complex_json(r.direct.physical[k]));
      mj["physical_eigenvalues"] = ev;
      modes.push_back(mj);
    }
    const KernelReport k = in_operation("kernel_check", [&] { return kernel_check(c, disc, cfg.spectrum.l_max); });
    j["kernel_dimension"] = k.dimension;
    j["kernel_residual"] = std::max({k.thetaResidual, k.hResidual, k.translationResidual});
    j["semisimple"] = in_operation("semisimplicity_check", [&] { return semisimplicity_check(c, disc); });
  } else {
    j["kernel_dimension"] = nullptr;
    j["semisimple"] = nullptr;
    j["per_mode"] = "skipped: disconnected interface";
  }
  j["modes"] = modes;
  if (ms.surface.gamma()(eq.thetaStar) > 0.0) {
    j["volume_exchange"] = in_operation("volume_exchange_spectrum", [&] { return volume_exchange_spectrum(ms, eq); });
  } else {
    j["volume_exchange"] = "skipped: GammaZero";
  }
  if (cfg.output.csv) out.write("spectrum.csv", t.str());
  if (cfg.output.json) out.write_json("spectrum.json", j);
  return {0, std::to_string(modes.size()) + " modes"};
}

// ---------------------------------------------------------------------------------------------
// simulate-radial

inline std::string profile_name(RadialProfile p) {
  switch (p) {
    case RadialProfile::TwoConstant: return "two_constant";
    case RadialProfile::Cosine: return "cosine";
    case RadialProfile::CentralSpot: return "central_spot";
  }
  return "unknown";
}

inline CommandResult run_simulate_radial(const RunConfig& cfg, ArtifactWriter& out) {
  const EquilibriumState eq = configured_equilibrium(cfg);
  if (eq.spheres.m() != 1) throw Error(ErrorCode::ConfigError, "simulate-radial: needs geometry.m = 1");
  if (eq.spheres.centers.front() != Point{0.0, 0.0, 0.0})
    throw Error(ErrorCode::ConfigError, "simulate-radial: the sphere must be centred at the origin");
  const RadialTask& T = cfg.radial;
  RadialGrid g;
  g.n = eq.n();
  g.R = eq.R();
  g.R_Omega = eq.domain.R_Omega;
  g.N1 = T.inner_cells;
  g.N2 = T.outer_cells;
  const RadialTrajectory tr = in_operation("simulate_radial", [&] {
    g.validate();
    const RadialState s0 = radial_initial(g, T.profile, eq.thetaStar, T.amplitude);
    return simulate_radial(cfg.materials, g, s0, T.dt, T.steps, T.record_every,
                           RadialStepOptions{T.newton_tol, T.newton_max_iterations});
  });
  if (cfg.output.csv) {
    CsvTable t({"t", "E", "Phi", "theta_gamma", "theta_min", "theta_max", "production"});
    for (const auto& s : tr.samples) t.row() << s.t << s.E << s.Phi << s.thetaGamma << s.thetaMin << s.thetaMax << s.production;
    out.write("radial.csv", t.str());
  }
  if (cfg.output.json) {
    const RadialDiagnostics& d = tr.diagnostics;
    Json j;
    j["profile"] = profile_name(T.profile);
    j["steps"] = T.steps;
    j["dt"] = T.dt;
    j["energy_drift"] = d.energyDrift;
    j["min_entropy_step"] = d.minEntropyStep;
    j["monotonicity_violations"] = d.monotonicityViolations;
    j["theta_infinity"] = d.thetaInfinity;
    j["terminal_error"] = d.terminalError;
    out.write_json("radial.json", j);
  }
  return {0, "energy drift " + format_double(tr.diagnostics.energyDrift)};
}

// ---------------------------------------------------------------------------------------------
// simulate-ripening

inline DropletState configured_droplets(const RunConfig& cfg, const EquilibriumState& eq) {
  DropletState s;
  const int m = eq.spheres.m();
  s.R.resize(m);
  for (int k = 0; k < m; ++k) {
    if (!cfg.ripening.radii.empty()) {
      s.R[k] = cfg.ripening.radii[k];
    } else {
      const double shift = m == 1 ? 0.0 : (k - 0.5 * (m - 1)) / (0.5 * (m - 1));
      s.R[k] = eq.R() * (1.0 + cfg.ripening.perturbation * shift);
    }
  }
  s.centers = eq.spheres.centers;
  return s;
}

inline CommandResult run_simulate_ripening(const RunConfig& cfg, ArtifactWriter& out) {
  const EquilibriumState eq = configured_equilibrium(cfg);
  const RipeningTask& T = cfg.ripening;
  const RipeningParams p = in_operation("ripening_params", [&] { return RipeningParams::at(cfg.materials, eq.thetaStar, eq.n()); });
  const DropletState s0 = configured_droplets(cfg, eq);
  RipeningOptions opt;
  opt.rtol = T.rtol;
  opt.atol = T.atol;
  opt.Rmin = T.R_min;
  const RipeningTrajectory tr = in_operation("simulate_ripening", [&] { return simulate_ripening(p, s0, T.horizon, T.dt0, opt); });
  const int m = static_cast<int>(s0.R.size());
  if (cfg.output.csv) {
    std::vector<std::string> header{"t"};
    for (int k = 0; k < m; ++k) header.push_back("R_" + std::to_string(k + 1));
    for (const char* h : {"volume", "area", "theta_bar", "min_gap"}) header.push_back(h);
    CsvTable t(header);
    for (const auto& s : tr.samples) {
      auto& row = t.row();
      row << s.t;
      for (int k = 0; k < m; ++k) row << s.R[k];
      row << s.volume << s.area << s.thetaBar << s.minGap;
    }
    out.write("ripening.csv", t.str());
  }
  if (cfg.output.json) {
    Json j;
    j["reduction"] = "quasi-static";
    j["m"] = m;
    j["rate"] = p.rate();
    j["R_min"] = tr.diagnostics.Rmin;
    j["volume_drift"] = tr.diagnostics.volumeDrift;
    j["volume_drift_between_events"] = tr.diagnostics.volumeDriftBetweenEvents;
    j["area_increases"] = tr.diagnostics.areaIncreases;
    Json ev = Json::array();
    for (const auto& e : tr.events) ev.push_back({{"t", e.t}, {"droplet", e.index + 1}, {"radius", e.radius}});
    j["events"] = ev;
    j["final_t"] = tr.final.t;
    j["final_radii"] = std::vector<double>(tr.final.R.data(), tr.final.R.data() + tr.final.R.size());
    out.write_json("ripening.json", j);
  }
  return {0, std::to_string(tr.events.size()) + " extinction events"};
}

}  // namespace twophase
