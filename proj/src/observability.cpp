#include "degenwave/observability.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <random>
#include <thread>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

EmpiricalResult run_ensemble(const Mesh& mesh, const DiscreteOperators& ops, const DegeneracyReport& report,
                             const std::vector<InitialData>& members, double T, const EnsembleOptions& options) {
  SolverOptions solver = options.solver;
  solver.state_stride = 0;
  EmpiricalResult out;
  out.members.resize(members.size());
  parallel_for(static_cast<Index>(members.size()), options.workers, [&](Index i) {
    const auto& m = members[i];
    const auto traj = solve_forward(mesh, ops, m.y0, m.y1, BoundaryData::zero(), T, solver);
    out.members[i] = observe(traj, mesh, report);
  });
  out.constant = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < out.members.size(); ++i) {
    if (out.members[i].ratio < out.constant) {
      out.constant = out.members[i].ratio;
      out.argmin = static_cast<Index>(i);
    }
  }
  return out;
}

void check_ensemble_options(const EnsembleOptions& options) {
  if (options.ensemble_size < 1) throw Error(ErrorKind::Precondition, "ensemble_size must be >= 1");
  if (!(options.filter_frac > 0.0 && options.filter_frac <= 1.0)) {
    throw Error(ErrorKind::Precondition, "filter_frac must lie in (0, 1]");
  }
}

std::pair<std::string, double> describe(const WeightSpec& spec) {
  if (const auto* s = std::get_if<SymmetricPower>(&spec)) return {"symmetric-power", s->p};
  if (std::holds_alternative<Uniform>(spec)) return {"uniform", 0.0};
  if (const auto* s = std::get_if<TwoSidedPower>(&spec)) {
    return {"two-sided-power(" + std::to_string(s->p1) + "," + std::to_string(s->p2) + ")",
            std::numeric_limits<double>::quiet_NaN()};
  }
  return {"tabulated", std::numeric_limits<double>::quiet_NaN()};
}

}  // namespace

void parallel_for(Index count, int workers, const std::function<void(Index)>& fn) {
  if (count <= 0) return;
  unsigned pool = workers > 0 ? static_cast<unsigned>(workers) : std::thread::hardware_concurrency();
  pool = std::max(1u, std::min<unsigned>(pool, static_cast<unsigned>(count)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  auto work = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (pool == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(pool);
    for (unsigned t = 0; t < pool; ++t) threads.emplace_back(work);
    for (auto& t : threads) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

ObservabilityResult observe(const Trajectory& traj, const Mesh& mesh, const DegeneracyReport& report) {
  ObservabilityResult r;
  r.E0 = traj.energy.size() > 0 ? traj.energy[0] : 0.0;
  if (!(r.E0 > 0.0)) {
    throw Error(ErrorKind::Precondition, "initial energy is zero; the observability ratio is undefined");
  }
  const double ic = trapezoid(traj.flux_c.array().square().matrix(), traj.dt);
  const double id = trapezoid(traj.flux_d.array().square().matrix(), traj.dt);
  const auto& dom = mesh.domain;
  r.obs_energy = ic + id;
  r.weighted_obs = (1.0 - dom.c) * mesh.a_c * ic + (dom.d - 1.0) * mesh.a_d * id;
  r.ratio = r.weighted_obs / r.E0;
  const double T = traj.times[traj.times.size() - 1];
  r.bound = observability_bracket(report, T) * r.E0;
  return r;
}

std::vector<InitialData> make_ensemble(const ModalBasis& basis, int size, std::uint64_t seed) {
  if (size < 1) throw Error(ErrorKind::Precondition, "ensemble_size must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const Index k = basis.count();
  const VectorXd root = basis.eigenvalues.cwiseSqrt();
  std::vector<InitialData> out;
  out.reserve(static_cast<std::size_t>(size));
  for (int m = 0; m < size; ++m) {
    VectorXd alpha(k), beta(k);
    for (Index j = 0; j < k; ++j) alpha[j] = normal(rng);
    for (Index j = 0; j < k; ++j) beta[j] = normal(rng);
    out.push_back({basis.vectors * alpha, basis.vectors * beta.cwiseProduct(root)});
  }
  return out;
}

EmpiricalResult empirical_constant(const Weight& w, const Mesh& mesh, const DiscreteOperators& ops,
                                   double T, const EnsembleOptions& options) {
  check_ensemble_options(options);
  const auto basis = low_modes(ops, filtered_mode_count(mesh, options.filter_frac));
  const auto members = make_ensemble(basis, options.ensemble_size, options.seed);
  return run_ensemble(mesh, ops, analyze(w), members, T, options);
}

std::vector<SweepRow> sweep(const std::vector<WeightSpec>& family, const DomainSpec& domain,
                            const std::vector<double>& T_list, const MeshParams& mesh_params,
                            const EnsembleOptions& options) {
  if (family.empty() || T_list.empty()) {
    throw Error(ErrorKind::Precondition, "sweep needs at least one weight and one final time");
  }
  check_ensemble_options(options);
  std::vector<SweepRow> rows;
  for (const auto& spec : family) {
    const Weight w(spec, domain);
    const auto report = analyze(w);
    const Mesh mesh = build_mesh(w, mesh_params.N, mesh_params.grading);
    const auto ops = make_operators(mesh);
    const auto basis = low_modes(ops, filtered_mode_count(mesh, options.filter_frac));
    const auto members = make_ensemble(basis, options.ensemble_size, options.seed);
    const double scale = std::max((1.0 - domain.c) * mesh.a_c, (domain.d - 1.0) * mesh.a_d);
    const auto [label, p] = describe(spec);
    for (double T : T_list) {
      const auto emp = run_ensemble(mesh, ops, report, members, T, options);
      SweepRow row;
      row.label = label;
      row.p = p;
      row.T = T;
      row.Ta = report.Ta;
      row.C_T_theory = observability_constant(report, w, T);
      row.C_emp = emp.constant;
      row.slack = emp.constant - row.C_T_theory * scale;
      row.slope_conditions_ok = report.slope_conditions_ok;
      rows.push_back(row);
    }
  }
  return rows;
}

bool strictly_decreasing_in_family(const std::vector<SweepRow>& rows) {
  std::map<double, double> last;
  for (const auto& r : rows) {
    const auto it = last.find(r.T);
    if (it != last.end() && !(r.C_emp < it->second)) return false;
    last[r.T] = r.C_emp;
  }
  return true;
}

IdentityResiduals identity_residuals(const Trajectory& traj, const Mesh& mesh, const DiscreteOperators& ops) {
  const Index steps = traj.steps();
  if (traj.state_stride != 1 || static_cast<Index>(traj.ys.size()) != steps + 1) {
    throw Error(ErrorKind::Precondition, "identity residuals need the state at every time step");
  }
  const Index N = mesh.cells();
  const auto& dom = mesh.domain;
  const VectorXd& g = ops.conductance;
  // Coefficient of the potential term, a - (x-1) a', per cell.
  const VectorXd pot = (mesh.a_mid.array() - mesh.s_mid.array() * mesh.da_mid.array()) / mesh.h.array();

  VectorXd boundary(steps + 1), bulk(steps + 1), virial_bulk(steps + 1), energy2(steps + 1);
  std::vector<double> moment(static_cast<std::size_t>(steps + 1)), yv(static_cast<std::size_t>(steps + 1));
  for (Index n = 0; n <= steps; ++n) {
    const VectorXd& y = traj.ys[n];
    const VectorXd& v = traj.vs[n];
    const auto dy = (y.tail(N) - y.head(N)).array();
    const auto vbar = 0.5 * (v.tail(N) + v.head(N)).array();
    const double kinetic = (ops.mass.array() * v.array().square()).sum();
    const double potential = (g.array() * dy.square()).sum();
    boundary[n] = (1.0 - dom.c) * mesh.a_c * traj.flux_c[n] * traj.flux_c[n] +
                  (dom.d - 1.0) * mesh.a_d * traj.flux_d[n] * traj.flux_d[n];
    bulk[n] = kinetic + (pot.array() * dy.square()).sum();
    virial_bulk[n] = potential - kinetic;
    energy2[n] = kinetic + potential;
    moment[n] = (mesh.s_mid.array() * dy * vbar).sum();
    yv[n] = (ops.mass.array() * y.array() * v.array()).sum();
  }
  const double dt = traj.dt;
  IdentityResiduals r;
  r.multiplier_lhs = trapezoid(boundary, dt);
  r.multiplier_rhs = 2.0 * (moment.back() - moment.front()) + trapezoid(bulk, dt);
  r.multiplier = std::abs(r.multiplier_lhs - r.multiplier_rhs) / std::abs(r.multiplier_lhs);
  const double virial = trapezoid(virial_bulk, dt) + (yv.back() - yv.front());
  r.virial = std::abs(virial) / trapezoid(energy2, dt);
  return r;
}

}  // namespace degenwave
