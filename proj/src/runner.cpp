#include "degenwave/runner.hpp"

#include <Eigen/Core>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace degenwave {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

#ifndef DEGENWAVE_VERSION
#define DEGENWAVE_VERSION "0.0.0"
#endif

// Output directory that remembers every file written through it.
class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void text(const std::string& name, const std::string& content) {
    std::ofstream out(dir_ / name, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + (dir_ / name).string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + (dir_ / name).string() + "'");
    record(name, content);
  }

  void json_file(const std::string& name, const json& j) { text(name, j.dump(2) + "\n"); }

  void binary(const std::string& name, const std::string& bytes) { text(name, bytes); }

  void manifest(const ExperimentConfig& cfg) {
    json m;
    m["tool"] = "degenwave";
    m["version"] = DEGENWAVE_VERSION;
    m["experiment"] = to_string(cfg.experiment);
    m["config_hash"] = fnv1a_hex(cfg.source);
    m["config_hash_algorithm"] = "fnv1a-64";
    m["seed"] = cfg.seed;
    m["versions"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                   std::to_string(EIGEN_MINOR_VERSION)},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    m["files"] = files_;
    const std::string body = m.dump(2) + "\n";
    std::ofstream out(dir_ / "manifest.json", std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write the manifest");
    out << body;
    names_.push_back("manifest.json");
  }

  const std::vector<std::string>& names() const { return names_; }

 private:
  void record(const std::string& name, const std::string& content) {
    files_.push_back({{"name", name}, {"bytes", content.size()}, {"fnv1a", fnv1a_hex(content)}});
    names_.push_back(name);
  }

  fs::path dir_;
  json files_ = json::array();
  std::vector<std::string> names_;
};

class Csv {
 public:
  explicit Csv(const std::vector<std::string>& header) { row_strings(header); }

  void row_strings(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) os_ << (i ? "," : "") << csv_field(fields[i]);
    os_ << "\r\n";
  }
  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) os_ << (i ? "," : "") << csv_number(values[i]);
    os_ << "\r\n";
  }
  std::string str() const { return os_.str(); }

 private:
  std::ostringstream os_;
};

json weight_json(const ExperimentConfig& cfg) {
  json j;
  j["kind"] = cfg.weight_kind;
  if (const auto* s = std::get_if<SymmetricPower>(&cfg.weight)) j["p"] = s->p;
  if (const auto* s = std::get_if<TwoSidedPower>(&cfg.weight)) {
    j["p1"] = s->p1;
    j["p2"] = s->p2;
  }
  if (const auto* s = std::get_if<Uniform>(&cfg.weight)) j["value"] = s->value;
  if (std::holds_alternative<Tabulated>(cfg.weight)) j["table"] = cfg.weight_table;
  return j;
}

json report_json(const DegeneracyReport& r) {
  return {{"class", to_string(r.cls)},
          {"mu1", r.mu1},
          {"kappa1", r.kappa1},
          {"mu2", r.mu2},
          {"kappa2", r.kappa2},
          {"D1a", r.D1a},
          {"D2a", r.D2a},
          {"Ca", r.Ca},
          {"Ca2", r.Ca2},
          {"Da", r.Da},
          {"Da2", r.Da * r.Da},
          {"poincare", r.poincare},
          {"Ta", r.Ta},
          {"slope_conditions_ok", r.slope_conditions_ok},
          {"exact", r.exact},
          {"sampling_tolerance", r.sampling_tolerance}};
}

json domain_json(const DomainSpec& d) {
  return {{"c", d.c}, {"d", d.d}, {"x1star", d.x1star}, {"x2star", d.x2star}};
}

void analyze_weight(const ExperimentConfig& cfg, Artifacts& out) {
  const Weight w(cfg.weight, cfg.domain);
  const auto report = analyze(w);
  json j;
  j["weight"] = weight_json(cfg);
  j["domain"] = domain_json(cfg.domain);
  const json constants = report_json(report);
  for (const auto& [k, v] : constants.items()) j[k] = v;
  out.json_file("report.json", j);

  Csv csv({"x", "a", "bound_global", "bound_inner"});
  const int samples = 400;
  for (int i = 0; i <= samples; ++i) {
    const double x = cfg.domain.c + (cfg.domain.d - cfg.domain.c) * i / samples;
    const auto b = envelope_lower_bounds(w, x);
    csv.row({x, w(x), b.global, b.inner_valid ? b.inner : std::numeric_limits<double>::quiet_NaN()});
  }
  out.text("envelope.csv", csv.str());
}

SolverOptions solver_with_stride(const ExperimentConfig& cfg) {
  SolverOptions o = cfg.solver;
  o.state_stride = cfg.snapshot_stride;
  return o;
}

void simulate(const ExperimentConfig& cfg, Artifacts& out) {
  const Weight w(cfg.weight, cfg.domain);
  const auto report = analyze(w);
  const Mesh mesh = build_mesh(w, cfg.N, cfg.grading);
  const auto ops = make_operators(mesh);
  const auto data = make_initial_data(cfg, mesh, ops);
  const double T = resolve_final_time(cfg, report);
  const auto traj = solve_forward(mesh, ops, data.y0, data.y1, BoundaryData::zero(), T, solver_with_stride(cfg));

  std::ostringstream csv;
  write_trajectory_csv(csv, traj);
  out.text("trajectory.csv", csv.str());
  if (cfg.snapshot_stride > 0) {
    std::ostringstream bin(std::ios::binary);
    write_snapshots(bin, traj);
    out.binary("snapshots.bin", bin.str());
  }
  const double E0 = traj.energy[0];
  const double drift = E0 > 0.0 ? (traj.energy.array() - E0).abs().maxCoeff() / E0 : 0.0;
  out.json_file("summary.json", {{"N", cfg.N},
                                 {"grading", cfg.grading},
                                 {"scheme", to_string(cfg.solver.scheme)},
                                 {"T", T},
                                 {"dt", traj.dt},
                                 {"steps", traj.steps()},
                                 {"E0", E0},
                                 {"relative_energy_drift", drift}});
}

void observability_sweep(const ExperimentConfig& cfg, Artifacts& out) {
  std::vector<WeightSpec> family;
  for (double p : cfg.p_list) family.emplace_back(SymmetricPower{p});
  EnsembleOptions eo;
  eo.ensemble_size = cfg.ensemble_size;
  eo.seed = cfg.seed;
  eo.filter_frac = cfg.filter_frac;
  eo.workers = cfg.workers;
  eo.solver = cfg.solver;
  const auto rows = sweep(family, cfg.domain, cfg.T_list, MeshParams{cfg.N, cfg.grading}, eo);

  Csv csv({"label", "p", "T", "Ta", "C_T_theory", "C_emp", "slack", "slope_conditions_ok"});
  for (const auto& r : rows) {
    csv.row_strings({r.label, csv_number(r.p), csv_number(r.T), csv_number(r.Ta), csv_number(r.C_T_theory),
                     csv_number(r.C_emp), csv_number(r.slack), r.slope_conditions_ok ? "true" : "false"});
  }
  out.text("sweep.csv", csv.str());

  Csv curve({"p", "Ta"});
  for (int i = 1; i < 40; ++i) {
    const double p = 0.05 * i;
    curve.row({p, analyze(Weight(SymmetricPower{p}, cfg.domain)).Ta});
  }
  out.text("ta_curve.csv", curve.str());
  out.json_file("summary.json", {{"rows", rows.size()},
                                 {"strictly_decreasing_in_family", strictly_decreasing_in_family(rows)},
                                 {"ensemble_size", cfg.ensemble_size},
                                 {"filter_frac", cfg.filter_frac},
                                 {"seed", cfg.seed}});
}

json hum_report_json(const HumReport& r, double T, double Ta) {
  json warnings = json::array();
  for (const auto& w : r.warnings) warnings.push_back(w);
  return {{"T", T},
          {"Ta", Ta},
          {"iterations", r.iterations},
          {"converged", r.converged},
          {"cg_residual", r.cg_residual},
          {"terminal_energy", r.terminal_energy},
          {"terminal_state_norm", r.terminal_state_norm},
          {"initial_state_norm", r.initial_state_norm},
          {"terminal_state_norm_ratio",
           r.initial_state_norm > 0.0 ? r.terminal_state_norm / r.initial_state_norm : 0.0},
          {"uncontrolled_terminal_energy", r.uncontrolled_terminal_energy},
          {"uncontrolled_terminal_norm", r.uncontrolled_terminal_norm},
          {"control_l2", r.control_l2},
          {"lambda_coercivity_estimate", r.lambda_coercivity_estimate},
          {"decoupled", r.decoupled},
          {"warnings", warnings}};
}

void write_hum(const HumResult& res, double T, double Ta, Artifacts& out) {
  Csv controls({"t", "f_c", "f_d"});
  for (Index n = 0; n < res.controls.f_d.size(); ++n) {
    controls.row({static_cast<double>(n) * res.controls.dt, res.controls.f_c[n], res.controls.f_d[n]});
  }
  out.text("controls.csv", controls.str());
  Csv hist({"iteration", "relative_residual", "objective"});
  const auto& rh = res.report.residual_history;
  const auto& oh = res.report.objective_history;
  for (std::size_t i = 0; i < rh.size(); ++i) {
    hist.row({static_cast<double>(i), rh[i], i > 0 && i - 1 < oh.size() ? oh[i - 1] : 0.0});
  }
  out.text("cg_history.csv", hist.str());
  out.json_file("hum_report.json", hum_report_json(res.report, T, Ta));
}

void hum(const ExperimentConfig& cfg, Artifacts& out) {
  const Weight w(cfg.weight, cfg.domain);
  const auto report = analyze(w);
  const Mesh mesh = build_mesh(w, cfg.N, cfg.grading);
  const auto ops = make_operators(mesh);
  const auto data = make_initial_data(cfg, mesh, ops);
  const double T = resolve_final_time(cfg, report);
  HumOptions ho;
  ho.tol = cfg.tol;
  ho.maxiter = cfg.maxiter;
  ho.filter_frac = cfg.filter_frac;
  ho.control_frac = cfg.control_frac;
  ho.time_ramp = cfg.time_ramp;
  ho.active = cfg.active;
  ho.solver = cfg.solver;
  try {
    write_hum(solve_hum(w, mesh, ops, data.y0, data.y1, T, ho), T, report.Ta, out);
  } catch (const NonConvergenceError& e) {
    write_hum(e.partial(), T, report.Ta, out);
    throw;
  }
}

void convergence(const ExperimentConfig& cfg, Artifacts& out) {
  const Weight w(cfg.weight, cfg.domain);
  const auto report = analyze(w);
  const double T = resolve_final_time(cfg, report);
  const int N0 = *std::min_element(cfg.N_list.begin(), cfg.N_list.end());
  auto run = [&](int N) {
    const Mesh mesh = build_mesh(w, N, cfg.grading);
    const auto ops = make_operators(mesh);
    const auto data = make_initial_data(cfg, mesh, ops);
    SolverOptions o = cfg.solver;
    o.state_stride = 0;
    if (o.dt > 0.0) o.dt *= static_cast<double>(N0) / N;
    const auto traj = solve_forward(mesh, ops, data.y0, data.y1, BoundaryData::zero(), T, o);
    return GridFunction{mesh.nodes, traj.y_end};
  };
  const auto table = self_convergence(run, cfg.N_list);
  Csv csv({"N", "error_vs_finest", "order"});
  for (std::size_t i = 0; i < table.N.size(); ++i) {
    const double order = i > 0 ? table.raw_orders.at(i - 1) : std::numeric_limits<double>::quiet_NaN();
    csv.row({static_cast<double>(table.N[i]), table.error[i], order});
  }
  out.text("convergence.csv", csv.str());
  json summary = {{"reference_N", table.reference_N}, {"T", T}, {"observed_order", table.observed_order}};
  json warnings = json::array();
  for (const auto& s : table.warnings) warnings.push_back(s);
  summary["warnings"] = warnings;

  if (const auto* u = std::get_if<Uniform>(&cfg.weight); u && cfg.data.kind == DataKind::Bump) {
    const auto& d = cfg.data;
    const auto ref = UniformStringReference::from_functions(
        cfg.domain.c, cfg.domain.d, std::sqrt(u->value), [&](double x) { return bump(x, d.lo, d.hi); },
        [&](double x) { return d.velocity * bump(x, d.lo, d.hi); });
    std::vector<int> Ns = cfg.N_list;
    std::sort(Ns.begin(), Ns.end());
    std::vector<double> errors;
    Csv oracle({"N", "error_vs_eigenmode_series", "order"});
    for (int N : Ns) {
      const auto g = run(N);
      double s = 0.0;
      const double h = (cfg.domain.d - cfg.domain.c) / N;
      for (Index j = 1; j < g.nodes.size() - 1; ++j) {
        const double diff = g.values[j] - ref(T, g.nodes[j]);
        s += h * diff * diff;
      }
      errors.push_back(std::sqrt(s));
    }
    const auto orders = observed_orders(Ns, errors);
    for (std::size_t i = 0; i < Ns.size(); ++i) {
      oracle.row({static_cast<double>(Ns[i]), errors[i],
                  i > 0 ? orders[i - 1] : std::numeric_limits<double>::quiet_NaN()});
    }
    out.text("oracle.csv", oracle.str());
    summary["oracle_order"] = orders.back();
    summary["oracle_tail_bound"] = ref.tail_bound();
  }
  out.json_file("summary.json", summary);
}

void decoupling(const ExperimentConfig& cfg, Artifacts& out) {
  const Weight w(cfg.weight, cfg.domain);
  const auto report = analyze(w);
  const double T = resolve_final_time(cfg, report);
  std::vector<int> Ns = cfg.N_list.empty() ? std::vector<int>{cfg.N} : cfg.N_list;
  std::sort(Ns.begin(), Ns.end());
  Csv csv({"N", "t", "leak"});
  json per_N = json::array();
  bool nonincreasing = true;
  double last = std::numeric_limits<double>::infinity();
  for (int N : Ns) {
    const Mesh mesh = build_mesh(w, N, cfg.grading);
    const auto ops = make_operators(mesh);
    const auto r = decoupling_check(w, mesh, ops, T, cfg.side, cfg.solver);
    for (std::size_t k = 0; k < r.times.size(); ++k) csv.row({static_cast<double>(N), r.times[k], r.leak[k]});
    per_N.push_back({{"N", N}, {"max_leak", r.max_leak}, {"final_leak", r.final_leak}});
    nonincreasing = nonincreasing && r.max_leak <= last;
    last = r.max_leak;
  }
  out.text("decoupling.csv", csv.str());
  out.json_file("summary.json", {{"T", T},
                                 {"grading", cfg.grading},
                                 {"side", cfg.side == DataSide::Left ? "left" : "right"},
                                 {"runs", per_N},
                                 {"nonincreasing_under_refinement", nonincreasing}});
}

}  // namespace

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + "\"";
}

std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

InitialData make_initial_data(const ExperimentConfig& cfg, const Mesh& mesh, const DiscreteOperators& ops) {
  const auto& d = cfg.data;
  if (d.kind == DataKind::Modes) {
    const auto basis = low_modes(ops, filtered_mode_count(mesh, d.filter_frac));
    return make_ensemble(basis, 1, cfg.seed).front();
  }
  InitialData data{VectorXd(mesh.size()), VectorXd(mesh.size())};
  for (Index i = 0; i < mesh.size(); ++i) {
    data.y0[i] = bump(mesh.nodes[i], d.lo, d.hi);
    data.y1[i] = d.velocity * data.y0[i];
  }
  return data;
}

RunOutcome run_experiment(const ExperimentConfig& config, const fs::path& directory) {
  Artifacts out(directory);
  auto finish = [&] {
    out.manifest(config);
    return RunOutcome{directory, out.names()};
  };
  try {
    switch (config.experiment) {
      case Experiment::AnalyzeWeight: analyze_weight(config, out); break;
      case Experiment::Simulate: simulate(config, out); break;
      case Experiment::ObservabilitySweep: observability_sweep(config, out); break;
      case Experiment::Hum: hum(config, out); break;
      case Experiment::Convergence: convergence(config, out); break;
      case Experiment::Decoupling: decoupling(config, out); break;
    }
  } catch (...) {
    finish();
    throw;
  }
  return finish();
}

std::string error_json(const std::exception& e) {
  json j;
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    j["kind"] = std::string(to_string(err->kind()));
  } else {
    j["kind"] = "Internal";
  }
  j["message"] = e.what();
  if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) j["issues"] = ce->issues();
  if (const auto* ne = dynamic_cast<const NonConvergenceError*>(&e)) {
    j["residual_history"] = ne->residual_history();
  }
  return j.dump(2) + "\n";
}

}  // namespace degenwave
