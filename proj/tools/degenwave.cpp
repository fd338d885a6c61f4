// Command line entry point: `degenwave run <config> [--out DIR]` and
// `degenwave validate <config>`.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "degenwave/runner.hpp"

namespace {

int write_error(const std::filesystem::path& dir, const std::exception& e) {
  std::cerr << "error: " << e.what() << "\n";
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream out(dir / "error.json", std::ios::binary);
  if (out) out << degenwave::error_json(e);
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments for the degenerate wave equation y_tt = (a y_x)_x"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Path to the YAML config")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory (overrides output.directory)");

  auto* validate = app.add_subcommand("validate", "Check a config file and list every problem found");
  validate->add_option("config", config_path, "Path to the YAML config")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  if (validate->parsed()) {
    try {
      const auto cfg = degenwave::load_config(config_path);
      std::cout << "valid: experiment " << degenwave::to_string(cfg.experiment) << "\n";
      return 0;
    } catch (const degenwave::ConfigError& e) {
      for (const auto& issue : e.issues()) std::cerr << issue << "\n";
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
  }

  std::filesystem::path dir = out_dir;
  try {
    const auto cfg = degenwave::load_config(config_path);
    if (dir.empty()) dir = cfg.output_dir;
    const auto outcome = degenwave::run_experiment(cfg, dir);
    for (const auto& f : outcome.files) std::cout << (outcome.directory / f).string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    return write_error(dir.empty() ? std::filesystem::path("out") : dir, e);
  }
}
