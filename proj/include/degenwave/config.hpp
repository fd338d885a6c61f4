#pragma once

// Experiment configuration: a YAML document with one scalar `experiment`
// key, optional `seed`, and the sections weight, domain, mesh, solver, data,
// run and output. Unknown keys are rejected; every violation found is
// reported, each with its line number.

#include <cstdint>
#include <string>
#include <vector>

#include "degenwave/error.hpp"
#include "degenwave/hum.hpp"
#include "degenwave/oracle.hpp"

namespace degenwave {

enum class Experiment { AnalyzeWeight, Simulate, ObservabilitySweep, Hum, Convergence, Decoupling };

Experiment parse_experiment(const std::string& name);
std::string to_string(Experiment e);

enum class DataKind { Bump, Modes };

struct DataSpec {
  DataKind kind = DataKind::Bump;
  double lo = 0.2;  // bump support
  double hi = 0.8;
  double velocity = 0.0;      // y1 = velocity * bump
  double filter_frac = 0.25;  // modes: random combination of the lowest modes
};

struct ExperimentConfig {
  Experiment experiment = Experiment::AnalyzeWeight;
  std::uint64_t seed = 0;

  WeightSpec weight = SymmetricPower{1.0};
  std::string weight_kind = "symmetric-power";
  std::string weight_table;  // resolved path for tabulated weights
  DomainSpec domain;

  int N = 256;
  double grading = 1.0;
  SolverOptions solver;

  DataSpec data;

  // Final time: T if positive, otherwise T_factor * Ta.
  double T = 0.0;
  double T_factor = 0.0;
  std::vector<double> p_list;
  std::vector<double> T_list;
  std::vector<int> N_list;
  int ensemble_size = 16;
  double filter_frac = 0.25;
  double control_frac = 0.5;
  double time_ramp = 0.1;
  double tol = 1e-8;
  int maxiter = 500;
  ActiveSides active = ActiveSides::Both;
  DataSide side = DataSide::Right;
  int workers = 0;

  std::string output_dir = "out";
  int snapshot_stride = 0;

  std::string source;  // the text the config was parsed from
};

/// Raised by parse_config with every violation, "line L: message" each.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

/// Relative weight table paths are resolved against `base_dir`.
ExperimentConfig parse_config(const std::string& text, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

/// Final time resolved against the weight's observability time.
double resolve_final_time(const ExperimentConfig& config, const DegeneracyReport& report);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace degenwave
