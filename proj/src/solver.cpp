#include "degenwave/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

// Solves (M_I + theta K_I) x = b on the interior nodes.
class InteriorSystem {
 public:
  InteriorSystem(const DiscreteOperators& ops, double theta, const SolverOptions& options)
      : kind_(options.linear_solver) {
    const Index n = ops.interior.rows();
    SparseMatrix m(n, n);
    std::vector<Eigen::Triplet<double>> diag;
    diag.reserve(n);
    for (Index i = 0; i < n; ++i) diag.emplace_back(i, i, ops.mass[i + 1]);
    m.setFromTriplets(diag.begin(), diag.end());
    system_ = m + theta * ops.interior;
    if (kind_ == LinearSolver::Direct) {
      ldlt_.compute(system_);
      if (ldlt_.info() != Eigen::Success) {
        throw Error(ErrorKind::Solver, "factorisation of the implicit step matrix failed");
      }
    } else {
      cg_.setTolerance(options.cg_tolerance);
      cg_.setMaxIterations(std::max<Index>(10 * (n + 2), 1));
      cg_.compute(system_);
    }
  }

  VectorXd solve(const VectorXd& rhs, const VectorXd& guess) {
    if (kind_ == LinearSolver::Direct) return ldlt_.solve(rhs);
    VectorXd x = cg_.solveWithGuess(rhs, guess);
    if (cg_.info() != Eigen::Success) {
      throw Error(ErrorKind::Solver, "implicit step CG did not converge: relative residual " +
                                         std::to_string(cg_.error()) + " after " +
                                         std::to_string(cg_.iterations()) + " iterations");
    }
    return x;
  }

 private:
  LinearSolver kind_;
  SparseMatrix system_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg_;
};

class Recorder {
 public:
  Recorder(const Mesh& mesh, const DiscreteOperators& ops, Index steps, double dt, int stride)
      : mesh_(mesh), ops_(ops), stride_(stride) {
    traj_.dt = dt;
    traj_.state_stride = stride;
    traj_.times.resize(steps + 1);
    traj_.energy.resize(steps + 1);
    traj_.flux_c.resize(steps + 1);
    traj_.flux_d.resize(steps + 1);
    traj_.aflux_c.resize(steps + 1);
    traj_.aflux_d.resize(steps + 1);
  }

  void record(Index n, double t, const VectorXd& y, const VectorXd& v) {
    traj_.times[n] = t;
    traj_.energy[n] = discrete_energy(ops_, y, v);
    const auto f = boundary_flux(mesh_, y);
    traj_.flux_c[n] = f.c;
    traj_.flux_d[n] = f.d;
    const auto af = conservative_flux(ops_, y);
    traj_.aflux_c[n] = af.c;
    traj_.aflux_d[n] = af.d;
    if (n == 0) {
      traj_.y_start = y;
      traj_.v_start = v;
    }
    if (stride_ > 0 && (n % stride_ == 0 || n + 1 == traj_.times.size())) {
      traj_.state_times.push_back(t);
      traj_.ys.push_back(y);
      traj_.vs.push_back(v);
    }
    if (n + 1 == traj_.times.size()) {
      traj_.y_end = y;
      traj_.v_end = v;
    }
  }

  Trajectory take() { return std::move(traj_); }

 private:
  const Mesh& mesh_;
  const DiscreteOperators& ops_;
  int stride_;
  Trajectory traj_;
};

void check_inputs(const DiscreteOperators& ops, const VectorXd& y0, const VectorXd& y1,
                  const BoundaryData& bdata, double T) {
  if (y0.size() != ops.size() || y1.size() != ops.size()) {
    throw Error(ErrorKind::Precondition, "initial data must have one value per mesh node");
  }
  if (!(T > 0.0)) throw Error(ErrorKind::Precondition, "final time T must be positive");
  const double fc = bdata.value_c(0.0);
  const double fd = bdata.value_d(0.0);
  const Index N = y0.size() - 1;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-10 * std::max(1.0, std::abs(b)); };
  if (!close(y0[0], fc) || !close(y0[N], fd)) {
    throw Error(ErrorKind::Precondition,
                "initial displacement endpoints must match the boundary data at t = 0");
  }
}

}  // namespace

Scheme parse_scheme(const std::string& name) {
  if (name == "leapfrog") return Scheme::Leapfrog;
  if (name == "implicit-midpoint") return Scheme::ImplicitMidpoint;
  throw Error(ErrorKind::Config, "unknown scheme '" + name + "' (leapfrog | implicit-midpoint)");
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Leapfrog ? "leapfrog" : "implicit-midpoint";
}

double BoundaryData::sample(const VectorXd& f, double t) const {
  if (f.size() == 0) return 0.0;
  if (f.size() == 1 || t <= 0.0) return f[0];
  const double s = t / dt;
  const Index k = static_cast<Index>(std::floor(s));
  if (k >= f.size() - 1) return f[f.size() - 1];
  const double u = s - static_cast<double>(k);
  return (1.0 - u) * f[k] + u * f[k + 1];
}

double cfl_dt(const Mesh& mesh, double safety) {
  if (!(safety > 0.0 && safety <= 1.0)) {
    throw Error(ErrorKind::Precondition, "CFL safety factor must lie in (0, 1]");
  }
  double dt = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < mesh.cells(); ++k) {
    const double amax = std::max({mesh.a_node[k], mesh.a_node[k + 1], mesh.a_mid[k]});
    dt = std::min(dt, mesh.h[k] / std::sqrt(amax));
  }
  return safety * dt;
}

double trapezoid(const VectorXd& values, double dt) {
  if (values.size() < 2) return 0.0;
  return dt * (values.sum() - 0.5 * (values[0] + values[values.size() - 1]));
}

Trajectory solve_forward(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0,
                         const VectorXd& y1, const BoundaryData& bdata, double T,
                         const SolverOptions& options) {
  check_inputs(ops, y0, y1, bdata, T);
  const double limit = cfl_dt(mesh, 1.0);
  double dt = options.dt > 0.0 ? options.dt : cfl_dt(mesh, options.cfl_safety);
  const auto steps = static_cast<Index>(std::ceil(T / dt - 1e-9));
  dt = T / static_cast<double>(steps);
  if (options.scheme == Scheme::Leapfrog && dt > limit * (1.0 + 1e-12)) {
    throw Error(ErrorKind::Stability, "leapfrog step " + std::to_string(dt) +
                                          " exceeds the CFL limit " + std::to_string(limit));
  }
  const Index N = y0.size() - 1;
  Recorder rec(mesh, ops, steps, dt, options.state_stride);
  auto set_boundary = [&](VectorXd& y, double t) {
    y[0] = bdata.value_c(t);
    y[N] = bdata.value_d(t);
  };

  if (options.scheme == Scheme::ImplicitMidpoint) {
    const double theta = 0.25 * dt * dt;
    InteriorSystem system(ops, theta, options);
    const auto m_int = ops.mass.segment(1, N - 1).array();
    VectorXd y = y0;
    VectorXd v = y1;
    rec.record(0, 0.0, y, v);
    for (Index n = 0; n < steps; ++n) {
      const double t_next = static_cast<double>(n + 1) * dt;
      // (M + theta K) y^{n+1} = M (y^n + dt v^n) - theta [K y^n + K_IB y_B^{n+1}]
      const VectorXd ky = (apply_stiffness(ops, y).segment(1, N - 1).array() * m_int).matrix();
      VectorXd rhs = (m_int * (y.segment(1, N - 1) + dt * v.segment(1, N - 1)).array()).matrix() -
                     theta * ky;
      const double fc = bdata.value_c(t_next);
      const double fd = bdata.value_d(t_next);
      rhs[0] += theta * ops.conductance[0] * fc;
      rhs[N - 2] += theta * ops.conductance[N - 1] * fd;
      const VectorXd guess = y.segment(1, N - 1) + dt * v.segment(1, N - 1);
      const VectorXd y_next = system.solve(rhs, guess);
      VectorXd v_next(N + 1);
      v_next.segment(1, N - 1) = 2.0 / dt * (y_next - y.segment(1, N - 1)) - v.segment(1, N - 1);
      v_next[0] = (fc - y[0]) / dt;
      v_next[N] = (fd - y[N]) / dt;
      y.segment(1, N - 1) = y_next;
      y[0] = fc;
      y[N] = fd;
      v = std::move(v_next);
      rec.record(n + 1, t_next, y, v);
    }
    return rec.take();
  }

  // Leapfrog: y^{n+1} = 2 y^n - y^{n-1} - dt^2 A y^n, Taylor start-up step.
  VectorXd prev = y0;
  VectorXd cur = y0 + dt * y1 - 0.5 * dt * dt * apply_stiffness(ops, y0);
  set_boundary(cur, dt);
  VectorXd v = y1;
  rec.record(0, 0.0, prev, v);
  for (Index n = 1; n <= steps; ++n) {
    const double t_next = static_cast<double>(n + 1) * dt;
    VectorXd next = 2.0 * cur - prev - dt * dt * apply_stiffness(ops, cur);
    set_boundary(next, t_next);
    v = (next - prev) / (2.0 * dt);
    rec.record(n, static_cast<double>(n) * dt, cur, v);
    prev = std::move(cur);
    cur = std::move(next);
  }
  return rec.take();
}

Trajectory solve_backward(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& wT0,
                          const VectorXd& wT1, double T, const SolverOptions& options) {
  const Index N = wT0.size() - 1;
  if (wT0.size() != ops.size() || wT0[0] != 0.0 || wT0[N] != 0.0) {
    throw Error(ErrorKind::Precondition, "backward final displacement must vanish at both endpoints");
  }
  // u(s) = w(T - s) solves the same equation with u(0) = wT0, u_s(0) = -wT1.
  Trajectory u = solve_forward(mesh, ops, wT0, -wT1, BoundaryData::zero(), T, options);
  Trajectory w;
  w.dt = u.dt;
  w.state_stride = u.state_stride;
  const Index steps = u.steps();
  w.times.resize(steps + 1);
  for (Index k = 0; k <= steps; ++k) w.times[k] = T - u.times[steps - k];
  w.times[0] = 0.0;
  w.energy = u.energy.reverse();
  w.flux_c = u.flux_c.reverse();
  w.flux_d = u.flux_d.reverse();
  w.aflux_c = u.aflux_c.reverse();
  w.aflux_d = u.aflux_d.reverse();
  for (std::size_t k = u.ys.size(); k-- > 0;) {
    w.state_times.push_back(T - u.state_times[k]);
    w.ys.push_back(u.ys[k]);
    w.vs.push_back(-u.vs[k]);
  }
  w.y_start = u.y_end;
  w.v_start = -u.v_end;
  w.y_end = u.y_start;
  w.v_end = -u.v_start;
  return w;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  os.precision(17);
  os << "t,E,flux_c,flux_d\n";
  for (Index k = 0; k < traj.times.size(); ++k) {
    os << traj.times[k] << ',' << traj.energy[k] << ',' << traj.flux_c[k] << ',' << traj.flux_d[k]
       << '\n';
  }
}

void write_snapshots(std::ostream& os, const Trajectory& traj) {
  for (std::size_t k = 0; k < traj.ys.size(); ++k) {
    const double t = traj.state_times[k];
    const auto n = static_cast<std::int64_t>(traj.ys[k].size());
    os.write(reinterpret_cast<const char*>(&t), sizeof t);
    os.write(reinterpret_cast<const char*>(&n), sizeof n);
    os.write(reinterpret_cast<const char*>(traj.ys[k].data()), n * sizeof(double));
    os.write(reinterpret_cast<const char*>(traj.vs[k].data()), n * sizeof(double));
  }
}

}  // namespace degenwave
