#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "degenwave/config.hpp"
#include "degenwave/observability.hpp"

namespace degenwave {

struct RunOutcome {
  std::filesystem::path directory;
  std::vector<std::string> files;  // relative to directory, manifest last
};

/// Runs the configured experiment and writes its artifacts plus manifest.json
/// into `directory`. Module errors propagate after any partial artifacts and
/// the manifest are written.
RunOutcome run_experiment(const ExperimentConfig& config, const std::filesystem::path& directory);

/// Initial data of simulate, hum and convergence runs on a given mesh.
InitialData make_initial_data(const ExperimentConfig& config, const Mesh& mesh, const DiscreteOperators& ops);

/// {"kind": ..., "message": ...} for the error file of the command line tool.
std::string error_json(const std::exception& e);

/// RFC 4180 field quoting.
std::string csv_field(const std::string& s);

/// Shortest round-trip text for a double ("%.17g").
std::string csv_number(double v);

}  // namespace degenwave
