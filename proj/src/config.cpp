#include "degenwave/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace degenwave {
namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += (out.empty() ? "" : "\n") + l;
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

// Collects violations while reading typed values out of the YAML tree.
class Reader {
 public:
  std::vector<std::string> issues;

  void add(const YAML::Node& at, const std::string& msg) {
    const auto mark = at.Mark();
    add(mark.is_null() ? 0 : mark.line + 1, msg);
  }
  void add(int line, const std::string& msg) {
    issues.push_back(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg);
  }

  // Map section `name` of `parent`, with its keys checked against `allowed`.
  YAML::Node section(const YAML::Node& parent, const std::string& name, const std::set<std::string>& allowed) {
    const YAML::Node node = parent[name];
    if (!node) return node;
    if (!node.IsMap()) {
      add(node, "'" + name + "' must be a section of key: value pairs");
      return YAML::Node();
    }
    check_keys(node, name, allowed);
    return node;
  }

  void check_keys(const YAML::Node& map, const std::string& where, const std::set<std::string>& allowed) {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        std::string list;
        for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
        add(kv.first, "unknown key '" + (where.empty() ? key : where + "." + key) + "' (expected one of: " +
                          list + ")");
      }
    }
  }

  template <class T>
  bool read(const YAML::Node& sec, const std::string& where, const std::string& key, T& out) {
    if (!sec) return false;
    const YAML::Node node = sec[key];
    if (!node) return false;
    try {
      out = node.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      add(node, "'" + where + "." + key + "' has the wrong type");
      return false;
    }
  }

  int line_of(const YAML::Node& sec, const std::string& key) {
    if (!sec || !sec[key]) return sec ? static_cast<int>(sec.Mark().line) + 1 : 0;
    return static_cast<int>(sec[key].Mark().line) + 1;
  }
};

const std::set<std::string> kTop{"experiment", "seed", "weight", "domain", "mesh", "solver", "data", "run", "output"};
const std::set<std::string> kWeight{"kind", "p", "p1", "p2", "value", "table"};
const std::set<std::string> kDomain{"c", "d", "x1star", "x2star"};
const std::set<std::string> kMesh{"N", "grading"};
const std::set<std::string> kSolver{"scheme", "dt", "cfl_safety", "linear_solver", "implicit_tolerance"};
const std::set<std::string> kData{"kind", "lo", "hi", "velocity", "filter_frac"};
const std::set<std::string> kRun{"T",        "T_factor", "p_list",    "T_list",   "N_list", "ensemble_size",
                                 "filter_frac", "control_frac", "time_ramp", "tol",      "maxiter", "active",
                                 "side",     "workers"};
const std::set<std::string> kOutput{"directory", "snapshot_stride"};

void check_power(Reader& r, int line, const std::string& key, double mu) {
  if (!(mu > 0.0 && mu < 2.0)) {
    r.add(line, "'weight." + key + "' gives degeneracy exponent mu = " + fmt(mu) + "; mu must lie in (0, 2)");
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : Error(ErrorKind::Config, "invalid configuration:\n" + join(issues)), issues_(std::move(issues)) {}

Experiment parse_experiment(const std::string& name) {
  static const std::map<std::string, Experiment> names{
      {"analyze-weight", Experiment::AnalyzeWeight}, {"simulate", Experiment::Simulate},
      {"observability-sweep", Experiment::ObservabilitySweep}, {"hum", Experiment::Hum},
      {"convergence", Experiment::Convergence}, {"decoupling", Experiment::Decoupling}};
  const auto it = names.find(name);
  if (it == names.end()) {
    throw Error(ErrorKind::Config, "unknown experiment '" + name +
                                       "' (analyze-weight | simulate | observability-sweep | hum | convergence | "
                                       "decoupling)");
  }
  return it->second;
}

std::string to_string(Experiment e) {
  switch (e) {
    case Experiment::AnalyzeWeight: return "analyze-weight";
    case Experiment::Simulate: return "simulate";
    case Experiment::ObservabilitySweep: return "observability-sweep";
    case Experiment::Hum: return "hum";
    case Experiment::Convergence: return "convergence";
    case Experiment::Decoupling: return "decoupling";
  }
  return "unknown";
}

ExperimentConfig parse_config(const std::string& text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError({"line " + std::to_string(e.mark.line + 1) + ": syntax error: " + e.msg});
  }
  if (!root.IsMap()) throw ConfigError({"the configuration must be a YAML mapping of sections"});

  Reader r;
  ExperimentConfig cfg;
  cfg.source = text;
  r.check_keys(root, "", kTop);

  std::string experiment;
  if (!r.read(root, "top level", "experiment", experiment)) {
    if (!root["experiment"]) r.add(1, "missing required key 'experiment'");
  } else {
    try {
      cfg.experiment = parse_experiment(experiment);
    } catch (const Error& e) {
      r.add(root["experiment"], e.what());
    }
  }
  r.read(root, "top level", "seed", cfg.seed);

  // Weight.
  const auto wsec = r.section(root, "weight", kWeight);
  bool weight_ok = true;
  r.read(wsec, "weight", "kind", cfg.weight_kind);
  if (cfg.weight_kind == "symmetric-power") {
    SymmetricPower s;
    r.read(wsec, "weight", "p", s.p);
    check_power(r, r.line_of(wsec, "p"), "p", s.p);
    weight_ok = s.p > 0.0 && s.p < 2.0;
    cfg.weight = s;
  } else if (cfg.weight_kind == "two-sided-power") {
    TwoSidedPower s;
    r.read(wsec, "weight", "p1", s.p1);
    r.read(wsec, "weight", "p2", s.p2);
    check_power(r, r.line_of(wsec, "p1"), "p1", 2.0 * s.p1);
    check_power(r, r.line_of(wsec, "p2"), "p2", 2.0 * s.p2);
    weight_ok = s.p1 > 0.0 && s.p1 < 1.0 && s.p2 > 0.0 && s.p2 < 1.0;
    cfg.weight = s;
  } else if (cfg.weight_kind == "uniform") {
    Uniform s;
    r.read(wsec, "weight", "value", s.value);
    if (!(s.value > 0.0)) {
      r.add(r.line_of(wsec, "value"), "'weight.value' must be positive");
      weight_ok = false;
    }
    cfg.weight = s;
  } else if (cfg.weight_kind == "tabulated") {
    if (!r.read(wsec, "weight", "table", cfg.weight_table)) {
      r.add(r.line_of(wsec, "table"), "a tabulated weight needs 'weight.table'");
      weight_ok = false;
    } else {
      std::filesystem::path p(cfg.weight_table);
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      cfg.weight_table = p.string();
      try {
        cfg.weight = read_weight_table(cfg.weight_table);
      } catch (const Error& e) {
        r.add(r.line_of(wsec, "table"), e.what());
        weight_ok = false;
      }
    }
  } else {
    r.add(r.line_of(wsec, "kind"), "unknown weight kind '" + cfg.weight_kind +
                                       "' (symmetric-power | two-sided-power | uniform | tabulated)");
    weight_ok = false;
  }

  // Domain.
  const auto dsec = r.section(root, "domain", kDomain);
  r.read(dsec, "domain", "c", cfg.domain.c);
  r.read(dsec, "domain", "d", cfg.domain.d);
  r.read(dsec, "domain", "x1star", cfg.domain.x1star);
  r.read(dsec, "domain", "x2star", cfg.domain.x2star);
  bool domain_ok = true;
  try {
    cfg.domain.validate();
  } catch (const Error& e) {
    r.add(dsec ? static_cast<int>(dsec.Mark().line) + 1 : 0, e.what());
    domain_ok = false;
  }

  // Mesh.
  const auto msec = r.section(root, "mesh", kMesh);
  r.read(msec, "mesh", "N", cfg.N);
  r.read(msec, "mesh", "grading", cfg.grading);
  if (cfg.N % 2 != 0) {
    r.add(r.line_of(msec, "N"), "'mesh.N' = " + std::to_string(cfg.N) +
                                    " is odd; the mesh needs a node exactly at x = 1, so N must be even");
  } else if (cfg.N < 8) {
    r.add(r.line_of(msec, "N"), "'mesh.N' must be at least 8");
  }
  if (!(cfg.grading >= 1.0)) r.add(r.line_of(msec, "grading"), "'mesh.grading' must be >= 1");

  // Solver.
  const auto ssec = r.section(root, "solver", kSolver);
  std::string name;
  if (r.read(ssec, "solver", "scheme", name)) {
    try {
      cfg.solver.scheme = parse_scheme(name);
    } catch (const Error& e) {
      r.add(ssec["scheme"], e.what());
    }
  }
  if (r.read(ssec, "solver", "linear_solver", name)) {
    if (name == "direct") {
      cfg.solver.linear_solver = LinearSolver::Direct;
    } else if (name == "cg") {
      cfg.solver.linear_solver = LinearSolver::ConjugateGradient;
    } else {
      r.add(ssec["linear_solver"], "unknown linear solver '" + name + "' (direct | cg)");
    }
  }
  r.read(ssec, "solver", "dt", cfg.solver.dt);
  r.read(ssec, "solver", "cfl_safety", cfg.solver.cfl_safety);
  r.read(ssec, "solver", "implicit_tolerance", cfg.solver.cg_tolerance);
  if (!(cfg.solver.dt >= 0.0)) r.add(r.line_of(ssec, "dt"), "'solver.dt' must be >= 0 (0 selects the CFL step)");
  if (!(cfg.solver.cfl_safety > 0.0 && cfg.solver.cfl_safety <= 1.0)) {
    r.add(r.line_of(ssec, "cfl_safety"), "'solver.cfl_safety' must lie in (0, 1]");
  }
  if (!(cfg.solver.cg_tolerance > 0.0)) r.add(r.line_of(ssec, "implicit_tolerance"), "'solver.implicit_tolerance' must be positive");

  // Data.
  const auto asec = r.section(root, "data", kData);
  if (r.read(asec, "data", "kind", name)) {
    if (name == "bump") {
      cfg.data.kind = DataKind::Bump;
    } else if (name == "modes") {
      cfg.data.kind = DataKind::Modes;
    } else {
      r.add(asec["kind"], "unknown data kind '" + name + "' (bump | modes)");
    }
  }
  r.read(asec, "data", "lo", cfg.data.lo);
  r.read(asec, "data", "hi", cfg.data.hi);
  r.read(asec, "data", "velocity", cfg.data.velocity);
  r.read(asec, "data", "filter_frac", cfg.data.filter_frac);
  if (!(cfg.data.lo < cfg.data.hi && cfg.data.lo >= cfg.domain.c && cfg.data.hi <= cfg.domain.d)) {
    r.add(r.line_of(asec, "lo"), "'data.lo' < 'data.hi' must hold inside the domain");
  }
  if (!(cfg.data.filter_frac > 0.0 && cfg.data.filter_frac <= 1.0)) {
    r.add(r.line_of(asec, "filter_frac"), "'data.filter_frac' must lie in (0, 1]");
  }

  // Run parameters.
  const auto rsec = r.section(root, "run", kRun);
  r.read(rsec, "run", "T", cfg.T);
  r.read(rsec, "run", "T_factor", cfg.T_factor);
  r.read(rsec, "run", "p_list", cfg.p_list);
  r.read(rsec, "run", "T_list", cfg.T_list);
  r.read(rsec, "run", "N_list", cfg.N_list);
  r.read(rsec, "run", "ensemble_size", cfg.ensemble_size);
  r.read(rsec, "run", "filter_frac", cfg.filter_frac);
  r.read(rsec, "run", "control_frac", cfg.control_frac);
  r.read(rsec, "run", "time_ramp", cfg.time_ramp);
  r.read(rsec, "run", "tol", cfg.tol);
  r.read(rsec, "run", "maxiter", cfg.maxiter);
  r.read(rsec, "run", "workers", cfg.workers);
  if (r.read(rsec, "run", "active", name)) {
    try {
      cfg.active = parse_active_sides(name);
    } catch (const Error& e) {
      r.add(rsec["active"], e.what());
    }
  }
  if (r.read(rsec, "run", "side", name)) {
    if (name == "left") {
      cfg.side = DataSide::Left;
    } else if (name == "right") {
      cfg.side = DataSide::Right;
    } else {
      r.add(rsec["side"], "unknown side '" + name + "' (left | right)");
    }
  }
  if (cfg.T < 0.0) r.add(r.line_of(rsec, "T"), "'run.T' must be positive");
  if (cfg.T_factor < 0.0) r.add(r.line_of(rsec, "T_factor"), "'run.T_factor' must be positive");
  if (cfg.ensemble_size < 1) r.add(r.line_of(rsec, "ensemble_size"), "'run.ensemble_size' must be >= 1");
  if (!(cfg.filter_frac > 0.0 && cfg.filter_frac <= 1.0)) {
    r.add(r.line_of(rsec, "filter_frac"), "'run.filter_frac' must lie in (0, 1]");
  }
  if (!(cfg.control_frac > 0.0 && cfg.control_frac <= 1.0)) {
    r.add(r.line_of(rsec, "control_frac"), "'run.control_frac' must lie in (0, 1]");
  }
  if (!(cfg.time_ramp >= 0.0 && cfg.time_ramp <= 0.5)) {
    r.add(r.line_of(rsec, "time_ramp"), "'run.time_ramp' must lie in [0, 0.5]");
  }
  if (!(cfg.tol > 0.0)) r.add(r.line_of(rsec, "tol"), "'run.tol' must be positive");
  if (cfg.maxiter < 1) r.add(r.line_of(rsec, "maxiter"), "'run.maxiter' must be >= 1");
  if (cfg.workers < 0) r.add(r.line_of(rsec, "workers"), "'run.workers' must be >= 0 (0 uses all cores)");
  for (double p : cfg.p_list) check_power(r, r.line_of(rsec, "p_list"), "p_list entry", p);
  for (double T : cfg.T_list) {
    if (!(T > 0.0)) r.add(r.line_of(rsec, "T_list"), "'run.T_list' entries must be positive");
  }
  for (int n : cfg.N_list) {
    if (n % 2 != 0 || n < 8) {
      r.add(r.line_of(rsec, "N_list"), "'run.N_list' entry " + std::to_string(n) +
                                           " must be even and >= 8 so that x = 1 is a node");
    }
  }

  // Output.
  const auto osec = r.section(root, "output", kOutput);
  r.read(osec, "output", "directory", cfg.output_dir);
  r.read(osec, "output", "snapshot_stride", cfg.snapshot_stride);
  if (cfg.snapshot_stride < 0) r.add(r.line_of(osec, "snapshot_stride"), "'output.snapshot_stride' must be >= 0");

  // Checks that need a constructed weight.
  const bool needs_T = cfg.experiment == Experiment::Simulate || cfg.experiment == Experiment::Hum ||
                       cfg.experiment == Experiment::Convergence || cfg.experiment == Experiment::Decoupling;
  if (needs_T && !(cfg.T > 0.0) && !(cfg.T_factor > 0.0)) {
    r.add(rsec ? static_cast<int>(rsec.Mark().line) + 1 : 0,
          "experiment '" + to_string(cfg.experiment) + "' needs 'run.T' or 'run.T_factor'");
  }
  if (cfg.experiment == Experiment::ObservabilitySweep && (cfg.p_list.empty() || cfg.T_list.empty())) {
    r.add(rsec ? static_cast<int>(rsec.Mark().line) + 1 : 0,
          "observability-sweep needs nonempty 'run.p_list' and 'run.T_list'");
  }
  if (cfg.experiment == Experiment::Convergence) {
    auto sorted = cfg.N_list;
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() < 3 || std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      r.add(r.line_of(rsec, "N_list"), "convergence needs at least 3 distinct sizes in 'run.N_list'");
    }
  }
  if (weight_ok && domain_ok) {
    try {
      const Weight w(cfg.weight, cfg.domain);
      const auto report = analyze(w);
      if (cfg.experiment == Experiment::Decoupling && report.cls != DegeneracyClass::Strong) {
        r.add(r.line_of(wsec, "kind"), "decoupling needs a strongly degenerate weight; this one is " +
                                           to_string(report.cls));
      }
      if (cfg.T_factor > 0.0 && !w.is_degenerate() && cfg.T <= 0.0) {
        r.add(r.line_of(rsec, "T_factor"), "'run.T_factor' needs a degenerate weight; set 'run.T' instead");
      }
    } catch (const Error& e) {
      r.add(wsec ? static_cast<int>(wsec.Mark().line) + 1 : 0, e.what());
    }
  }

  if (!r.issues.empty()) {
    auto line = [](const std::string& s) { return s.rfind("line ", 0) == 0 ? std::atoi(s.c_str() + 5) : 0; };
    std::stable_sort(r.issues.begin(), r.issues.end(),
                     [&](const std::string& a, const std::string& b) { return line(a) < line(b); });
    throw ConfigError(r.issues);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto base = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), base.empty() ? "." : base.string());
}

double resolve_final_time(const ExperimentConfig& config, const DegeneracyReport& report) {
  if (config.T > 0.0) return config.T;
  if (config.T_factor > 0.0) return config.T_factor * report.Ta;
  throw Error(ErrorKind::Config, "no final time configured");
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace degenwave
