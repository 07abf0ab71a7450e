#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mfc/cli.hpp"

int main(int argc, char** argv) {
  using namespace mfc::cli;

  CLI::App app{"Model-free control simulation toolkit"};
  app.require_subcommand(1);
  // Global flags are accepted after the subcommand too.
  app.fallthrough();
  app.set_version_flag("--version", std::string(mfc::version));

  Options opt;
  long long seed = -1;
  app.add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
  app.add_flag("--force", opt.force, "Run even when the scenario has validation violations");
  app.add_option("--seed", seed, "Override the scenario noise seed")->check(CLI::NonNegativeNumber);
  app.add_option("--presets", opt.preset_dir, "Directory holding the preset scenario files")->capture_default_str();

  std::string scenario, scenario_b, preset_id;

  auto* run = app.add_subcommand("run", "Run one scenario, write trace.csv and metrics.txt");
  run->add_option("scenario", scenario, "Scenario file")->required();

  auto* compare = app.add_subcommand("compare", "Run two scenarios on the same grid and compare metrics");
  compare->add_option("scenario_a", scenario, "First scenario")->required();
  compare->add_option("scenario_b", scenario_b, "Second scenario")->required();

  auto* preset = app.add_subcommand("preset", "Run a committed preset experiment");
  preset->add_option("id", preset_id, "Preset name")->required();

  auto* validate = app.add_subcommand("validate", "Check a scenario's Lipschitz, window and band conditions");
  validate->add_option("scenario", scenario, "Scenario file")->required();

  mfc::EnergyDemoConfig demo;
  std::string method = "all";
  auto* energy = app.add_subcommand("energy-demo", "Energy of a mass-spring oscillator under three integrators");
  energy->set_help_flag("--help", "Print this help message and exit");
  energy->add_option("--h", demo.h, "Step size")->capture_default_str();
  energy->add_option("--steps", demo.steps, "Number of steps")->capture_default_str();
  energy->add_option("--m", demo.params.mass, "Mass")->capture_default_str();
  energy->add_option("--k", demo.params.stiffness, "Spring constant")->capture_default_str();
  energy->add_option("--method", method, "symplectic, explicit, rk4 or all")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }
  if (seed >= 0) opt.seed = static_cast<std::uint64_t>(seed);

  if (*run) return cmd_run(scenario, opt, std::cout, std::cerr);
  if (*compare) return cmd_compare(scenario, scenario_b, opt, std::cout, std::cerr);
  if (*preset) return cmd_preset(preset_id, opt, std::cout, std::cerr);
  if (*validate) return cmd_validate(scenario, opt, std::cout, std::cerr);
  if (*energy) {
    try {
      demo.methods = mfc::parse_methods(method);
    } catch (const mfc::Error& e) {
      std::cerr << "error: " << e.what() << '\n';
      return exit_usage;
    }
    return cmd_energy_demo(demo, opt, std::cout, std::cerr);
  }
  return exit_usage;
}
