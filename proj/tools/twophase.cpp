// Command-line runner: twophase <subcommand> [--config PATH] [--set key=value]... [--out DIR] [--threads N]
// Exit codes: 0 success, 1 checks failed, 2 invalid configuration or arguments, 3 numerical failure.

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twophase/config.hpp"
#include "twophase/runner.hpp"
#include "twophase/suite.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitChecksFailed = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config;
  std::vector<std::string> overrides;
  std::string out;
  int threads = 1;
};

std::string output_directory(const Options& o, const twophase::RunConfig& cfg) {
  if (!o.out.empty()) return o.out;
  if (const char* env = std::getenv("TWOPHASE_OUT"); env && *env) return env;
  return cfg.output.directory;
}

int run(const std::string& command, const Options& o) {
  using namespace twophase;
  const RunConfig cfg = load_config(o.config, o.overrides);
  if (o.threads < 1) throw Error(ErrorCode::ConfigError, "--threads: must be at least 1");
  ArtifactWriter out(output_directory(o, cfg));

  CommandResult res;
  if (command == "validate-materials") {
    res = run_validate_materials(cfg, out);
  } else if (command == "equilibrium") {
    res = run_equilibrium(cfg, out);
  } else if (command == "variations") {
    res = run_variations(cfg, out);
  } else if (command == "spectrum") {
    res = run_spectrum(cfg, out, o.threads);
  } else if (command == "simulate-radial") {
    res = run_simulate_radial(cfg, out);
  } else if (command == "simulate-ripening") {
    res = run_simulate_ripening(cfg, out);
  } else if (command == "suite") {
    const SuiteReport rep = run_suite(cfg, out, SuiteOptions{o.threads, true});
    for (int c = 1; c <= kCriterionCount; ++c)
      std::cout << "criterion " << c << " (" << criterion_title(c) << "): " << to_string(rep.criterion(c)) << "\n";
    res = {rep.ok() ? kExitOk : kExitChecksFailed, rep.ok() ? "all checks passed" : "checks failed"};
  }
  out.write_manifest(command, cfg.effective);
  std::cout << command << ": " << res.summary << " (" << out.directory().string() << ")\n";
  return res.exitCode;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sharp-interface two-phase flow toolkit"};
  app.require_subcommand(1, 1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"validate-materials", "check the material set against the model assumptions"},
      {"equilibrium", "construct the equilibrium selected by the geometry section"},
      {"variations", "second variation on probe directions and definiteness classification"},
      {"spectrum", "per-mode dispersion samples and direct pencil spectra"},
      {"simulate-radial", "radially symmetric heat exchange with a fixed sphere"},
      {"simulate-ripening", "quasi-static ripening of m droplets"},
      {"suite", "acceptance checks with a pass/fail table"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config, "YAML configuration file (defaults when omitted)");
    sub->add_option("--set", opt.overrides, "override key.path=value (repeatable)");
    sub->add_option("--out", opt.out, "output directory (overrides config and TWOPHASE_OUT)");
    sub->add_option("--threads", opt.threads, "worker threads for independent tasks");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, opt);
  } catch (const twophase::Error& e) {
    if (e.code() == twophase::ErrorCode::ConfigError) {
      std::cerr << "invalid configuration: " << e.message() << "\n";
      return kExitInvalid;
    }
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
