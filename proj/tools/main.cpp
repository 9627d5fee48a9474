#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "unisynth/error.hpp"
#include "unisynth/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct Globals {
  std::string out_dir = "out";
  int threads = 1;
  bool verbose = false;
};

void log(const Globals& g, const std::string& msg) {
  if (g.verbose) std::cerr << msg << '\n';
}

void report_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

int cmd_simulate(const Globals& g, const std::string& cfg) {
  const auto scenario = unisynth::load_scenario(cfg);
  log(g, "simulating '" + scenario.name + "'");
  auto result = unisynth::simulate(scenario, g.threads);
  report_warnings(result.warnings);
  result.files["metrics.json"] = unisynth::dump_json(result.metrics);
  unisynth::write_outputs(g.out_dir, result.files);
  for (const auto& [name, content] : result.files) log(g, "wrote " + (std::filesystem::path(g.out_dir) / name).string());
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& cfg) {
  const auto spec = unisynth::parse_sweep(unisynth::read_json_file(cfg),
                                          std::filesystem::path(cfg).parent_path().string());
  log(g, "sweeping " + std::to_string(spec.axes.size()) + " parameter(s)");
  const auto csv = unisynth::run_sweep(spec, g.threads);
  unisynth::write_outputs(g.out_dir, {{"sweep.csv", csv}});
  log(g, "wrote " + (std::filesystem::path(g.out_dir) / "sweep.csv").string());
  return 0;
}

int cmd_calibrate(const Globals& g, const std::string& cfg, const std::string& procedure) {
  const auto scenario = unisynth::load_scenario(cfg);
  log(g, "calibrating '" + scenario.name + "' with " + procedure);
  const auto r = unisynth::calibrate(scenario, procedure, g.threads);
  if (r.reverted) std::cerr << "warning: correction did not improve the metric and was not applied\n";
  const unisynth::Json correction = {{"procedure", r.procedure}, {"applied", !r.reverted}, {"correction", r.correction}};
  const unisynth::Json summary = {
      {"procedure", r.procedure}, {"applied", !r.reverted}, {"before", r.before}, {"after", r.after}};
  unisynth::write_outputs(g.out_dir,
                          {{"correction.json", unisynth::dump_json(correction)},
                           {"calibration.json", unisynth::dump_json(summary)},
                           {"calibrated_scenario.json", unisynth::dump_json(unisynth::scenario_to_json(r.calibrated))}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Unified transmitter and qubit-drive synthesis simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out-dir", g.out_dir, "Directory for output files")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads for sweeps and calibration grids")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_flag("--verbose", g.verbose, "Progress messages on stderr");

  std::string cfg;
  std::string procedure;
  auto* sim = app.add_subcommand("simulate", "Run one scenario");
  sim->add_option("config", cfg, "Scenario JSON")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("config", cfg, "Sweep JSON")->required();
  auto* cal = app.add_subcommand("calibrate", "Run a calibration procedure");
  cal->add_option("config", cfg, "Scenario JSON")->required();
  cal->add_option("--procedure", procedure, "rabi, iq, polar_delay, dpd or leakage")
      ->required()
      ->check(CLI::IsMember({"rabi", "iq", "polar_delay", "dpd", "leakage"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*sim) return cmd_simulate(g, cfg);
    if (*sweep) return cmd_sweep(g, cfg);
    return cmd_calibrate(g, cfg, procedure);
  } catch (const unisynth::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
