#include <charconv>
#include <filesystem>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "twophase/config.hpp"
#include "twophase/io.hpp"
#include "twophase/runner.hpp"
#include "twophase/suite.hpp"

using namespace twophase;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("twophase_test_" + name);
  fs::remove_all(p);
  return p;
}

ErrorCode config_code(const std::vector<std::string>& overrides) {
  try {
    load_config("", overrides);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;  // sentinel: no error raised
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST(Io, ShortestFormattingRoundTrips) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double x = U(rng) * std::pow(10.0, static_cast<int>(60 * U(rng)));
    const std::string s = format_double(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
    EXPECT_EQ(s.find(','), std::string::npos);
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
}

TEST(Io, Sha256KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(Io, CsvQuotingAndWidth) {
  CsvTable t({"a", "b"});
  t.row() << "x,y" << 1.5;
  EXPECT_EQ(t.str(), "a,b\n\"x,y\",1.5\n");
  t.row() << 1;
  EXPECT_THROW(t.str(), Error);
}

TEST(Io, ManifestListsEveryFileWithChecksum) {
  const fs::path dir = scratch("manifest");
  ArtifactWriter w(dir);
  w.write("a.csv", "x\n1\n");
  w.write("b.json", "{}\n");
  w.write("a.csv", "x\n2\n");  // rewrite replaces the record
  w.write_manifest("test", Json{{"k", 1}});
  const auto m = nlohmann::json::parse(read_file(dir / "manifest.json"));
  EXPECT_EQ(m["schema_version"], kManifestSchemaVersion);
  EXPECT_EQ(m["library_version"], std::string(kLibraryVersion));
  EXPECT_EQ(m["config_sha256"], sha256_hex(Json{{"k", 1}}.dump()));
  ASSERT_EQ(m["files"].size(), 2u);
  for (const auto& f : m["files"]) {
    const std::string body = read_file(dir / f["name"].get<std::string>());
    EXPECT_EQ(f["sha256"], sha256_hex(body));
    EXPECT_EQ(f["bytes"], body.size());
  }
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_NE(e.path().extension(), ".tmp");
}

TEST(Config, DefaultsMatchDefaultMaterials) {
  const RunConfig cfg = load_config("");
  const MaterialSet d = default_materials();
  for (int k = 1; k <= 2; ++k) {
    EXPECT_EQ(cfg.materials.phase(k).rho, d.phase(k).rho);
    EXPECT_EQ(cfg.materials.phase(k).psi(0.7), d.phase(k).psi(0.7));
  }
  EXPECT_EQ(cfg.materials.thetaC(), 2.0);
  EXPECT_EQ(cfg.materials.surface.gamma()(1.0), 0.1);
  EXPECT_EQ(cfg.geometry.m(), 1);
}

TEST(Config, ShippedFileEqualsBuiltInDefaults) {
  const RunConfig file = load_config(TWOPHASE_DEFAULT_CONFIG);
  const RunConfig builtin = load_config("", {"geometry.R_star=1.0"});
  EXPECT_EQ(file.effective.dump(), builtin.effective.dump());
}

TEST(Config, UnknownKeysAreRejected) {
  EXPECT_EQ(config_code({"geometry.radius=1"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"materials.phase1.free_energy.d=1"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"extra=1"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"task.unknown.x=1"}), ErrorCode::ConfigError);
}

TEST(Config, InvalidValuesAreRejected) {
  EXPECT_EQ(config_code({"geometry.n=4"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"geometry.n=abc"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"geometry.mass=10", "geometry.R_star=1"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"materials.surface.tension.family=linear"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"materials.surface.tension.family=polynomial",
                         "materials.surface.tension.coefficients=[1.0, 1.0]"}),
            ErrorCode::ConfigError);  // no zero on (0, 100)
  EXPECT_EQ(config_code({"output.formats=[xml]"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"geometry.m=2", "task.ripening.radii=[0.5]"}), ErrorCode::ConfigError);
  EXPECT_EQ(config_code({"novalue"}), ErrorCode::ConfigError);
}

TEST(Config, OverridesApply) {
  const RunConfig cfg = load_config("", {"geometry.n=2", "materials.surface.kinetic.value=0.25",
                                         "geometry.m=2", "task.ripening.radii=[0.3, 0.4]"});
  EXPECT_EQ(cfg.geometry.domain.n, 2);
  EXPECT_EQ(cfg.materials.surface.gamma()(1.0), 0.25);
  EXPECT_EQ(cfg.geometry.m(), 2);
  ASSERT_EQ(cfg.ripening.radii.size(), 2u);
  EXPECT_EQ(cfg.effective["geometry"]["n"], 2);
}

TEST(Config, MassAndEnergySelectTheEquilibrium) {
  const RunConfig base = load_config("", {"geometry.R_star=0.6", "geometry.theta_star=1.2"});
  const EquilibriumState a = configured_equilibrium(base);
  const ConservedTotals t = total_functionals(base.materials, a.domain, a.spheres, a.thetaStar);
  const RunConfig alt = load_config("", {"geometry.mass=" + format_double(t.M), "geometry.energy=" + format_double(t.E)});
  const EquilibriumState b = configured_equilibrium(alt);
  EXPECT_NEAR(b.R(), 0.6, 1e-12);
  EXPECT_NEAR(b.thetaStar, 1.2, 1e-10);
}

TEST(Config, OverlappingSpheresAreAConfigError) {
  const RunConfig cfg = load_config("", {"geometry.m=2", "geometry.ring_radius=0.2", "geometry.R_star=0.5"});
  try {
    configured_equilibrium(cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ConfigError);
  }
}

TEST(Runner, EquilibriumRecordFields) {
  const fs::path dir = scratch("equilibrium");
  ArtifactWriter w(dir);
  run_equilibrium(load_config(""), w);
  const auto j = nlohmann::ordered_json::parse(read_file(dir / "equilibrium.json"));
  std::vector<std::string> keys;
  for (const auto& [k, v] : j.items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"n", "m", "R_star", "theta_star", "pi1", "pi2", "H_star", "M", "E", "Phi"}));
  EXPECT_DOUBLE_EQ(j["pi2"].get<double>() - j["pi1"].get<double>(), 0.75 * 2.0 / 0.5);
}

TEST(Runner, SpectrumCsvContract) {
  const fs::path dir = scratch("spectrum");
  ArtifactWriter w(dir);
  const RunConfig cfg = load_config("", {"task.spectrum.l_max=2", "task.spectrum.nodes=16", "task.spectrum.lambda_points=8"});
  run_spectrum(cfg, w, 2);
  const std::string csv = read_file(dir / "spectrum.csv");
  EXPECT_EQ(first_line(csv), "n,l,lambda,F,dtn,s11,s22,tau");
  EXPECT_EQ(line_count(csv), 1u + 3u * 9u - 1u);  // l = 0 omits lambda = 0
  const auto j = nlohmann::json::parse(read_file(dir / "spectrum.json"));
  EXPECT_EQ(j["modes"].size(), 3u);
  EXPECT_EQ(j["kernel_dimension"], 3 + 2);
  EXPECT_TRUE(j["semisimple"].get<bool>());
  for (const auto& m : j["modes"]) EXPECT_TRUE(m.contains("roots") && m.contains("leading_eigenvalue"));
}

TEST(Runner, SpectrumWithoutKineticCoefficientSkipsDispersion) {
  const fs::path dir = scratch("spectrum_gamma0");
  ArtifactWriter w(dir);
  const RunConfig cfg = load_config("", {"task.spectrum.l_max=1", "task.spectrum.nodes=16",
                                         "materials.surface.kinetic.value=0"});
  run_spectrum(cfg, w, 1);
  EXPECT_EQ(line_count(read_file(dir / "spectrum.csv")), 1u);
  const auto j = nlohmann::json::parse(read_file(dir / "spectrum.json"));
  EXPECT_EQ(j["modes"][0]["dispersion"], "skipped: GammaZero");
  EXPECT_EQ(j["volume_exchange"], "skipped: GammaZero");
  EXPECT_FALSE(j["modes"][1]["physical_eigenvalues"].empty());
}

TEST(Runner, VariationsCsvHasOneRowPerProbe) {
  const fs::path dir = scratch("variations");
  ArtifactWriter w(dir);
  const RunConfig cfg = load_config("", {"geometry.m=2", "geometry.R_star=0.5", "task.variations.l_max=2"});
  run_variations(cfg, w);
  const std::string csv = read_file(dir / "variations.csv");
  EXPECT_EQ(first_line(csv), "label,constrained,value");
  const int probes = 2 * 3 + 2 + 2 * 2 * harmonic_count(3, 2);
  EXPECT_EQ(line_count(csv), 1u + 2u * probes + 1u);  // plus the witness row
  const auto j = nlohmann::json::parse(read_file(dir / "variations.json"));
  EXPECT_EQ(j["classification"], "indefinite");
  EXPECT_EQ(j["positive_dimension"], 1);
}

TEST(Runner, SimulationsWriteTrajectories) {
  const fs::path dir = scratch("simulations");
  ArtifactWriter w(dir);
  run_simulate_radial(load_config("", {"task.radial.steps=40", "task.radial.record_every=10"}), w);
  EXPECT_EQ(line_count(read_file(dir / "radial.csv")), 1u + 5u);
  const RunConfig rip = load_config("", {"geometry.m=3", "geometry.R_star=0.4", "task.ripening.perturbation=0.2"});
  run_simulate_ripening(rip, w);
  EXPECT_EQ(first_line(read_file(dir / "ripening.csv")), "t,R_1,R_2,R_3,volume,area,theta_bar,min_gap");
  const auto j = nlohmann::json::parse(read_file(dir / "ripening.json"));
  EXPECT_EQ(j["events"].size(), 2u);
  EXPECT_EQ(j["events"][0]["droplet"], 1);  // smallest initial radius
}

TEST(Runner, RadialNeedsASingleCentredSphere) {
  const fs::path dir = scratch("radial_m2");
  ArtifactWriter w(dir);
  EXPECT_THROW(run_simulate_radial(load_config("", {"geometry.m=2", "geometry.R_star=0.5"}), w), Error);
  EXPECT_FALSE(fs::exists(dir));
}

TEST(Runner, RepeatedRunsAreByteIdentical) {
  const RunConfig cfg = load_config("", {"task.spectrum.l_max=2", "task.spectrum.nodes=16", "task.radial.steps=50",
                                         "geometry.m=1"});
  std::vector<std::string> bodies[2];
  for (int k = 0; k < 2; ++k) {
    const fs::path dir = scratch("repeat" + std::to_string(k));
    ArtifactWriter w(dir);
    run_equilibrium(cfg, w);
    run_variations(cfg, w);
    run_spectrum(cfg, w, k + 1);  // thread count must not change the output
    run_simulate_radial(cfg, w);
    w.write_manifest("repeat", cfg.effective);
    for (const auto& r : w.records()) bodies[k].push_back(read_file(dir / r.name));
    bodies[k].push_back(read_file(dir / "manifest.json"));
  }
  EXPECT_EQ(bodies[0], bodies[1]);
}

TEST(Suite, SkipSemantics) {
  const RunConfig gamma0 = load_config("", {"materials.surface.kinetic.value=0"});
  suite_detail::Context c0{gamma0, 1, true, false, 1.0};
  SuiteReport r0;
  suite_detail::criterion6(c0, r0);
  ASSERT_FALSE(r0.checks.empty());
  for (const auto& r : r0.checks) {
    EXPECT_EQ(r.status, CheckStatus::Skipped);
    EXPECT_EQ(r.detail, "skipped: GammaZero");
  }
  EXPECT_EQ(r0.criterion(6), CheckStatus::Skipped);

  const RunConfig two = load_config("", {"geometry.m=2", "geometry.R_star=0.5"});
  suite_detail::Context c2{two, 1, false, true, 1.0};
  SuiteReport r2;
  suite_detail::criterion4(c2, r2);
  ASSERT_EQ(r2.checks.size(), 1u);
  EXPECT_EQ(r2.checks[0].status, CheckStatus::Skipped);
  suite_detail::criterion6(c2, r2);
  EXPECT_EQ(r2.criterion(6), CheckStatus::Pass);
}

TEST(Suite, CriterionStatusAggregation) {
  SuiteReport r;
  suite_detail::Recorder rec(r, 1);
  rec.le("a", 1.0, 2.0);
  rec.skip("b", "skipped: test");
  EXPECT_EQ(r.criterion(1), CheckStatus::Pass);
  rec.ge("c", 1.0, 2.0);
  EXPECT_EQ(r.criterion(1), CheckStatus::Fail);
  EXPECT_EQ(r.criterion(2), CheckStatus::Skipped);
  rec.le("nan", std::numeric_limits<double>::quiet_NaN(), 1.0);
  EXPECT_EQ(r.checks.back().status, CheckStatus::Fail);
}
