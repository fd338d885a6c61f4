#include "degenwave/hum.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

namespace degenwave {
namespace {

using SparseMatrix = Eigen::SparseMatrix<double>;

VectorXd embed(const VectorXd& interior) {
  VectorXd full = VectorXd::Zero(interior.size() + 2);
  full.segment(1, interior.size()) = interior;
  return full;
}

// Factorised interior stiffness, for V^-1 norms and the CG preconditioner.
class StiffnessSolve {
 public:
  explicit StiffnessSolve(const DiscreteOperators& ops) : mass_(ops.mass.segment(1, ops.size() - 2)) {
    ldlt_.compute(ops.interior);
    if (ldlt_.info() != Eigen::Success) {
      throw Error(ErrorKind::Solver, "interior stiffness is singular; the weight or mesh violates positivity");
    }
  }
  VectorXd solve(const VectorXd& b) const { return ldlt_.solve(b); }
  const VectorXd& mass() const { return mass_; }

  double vminus_sq(const VectorXd& g_interior) const {
    const VectorXd mg = mass_.cwiseProduct(g_interior);
    return mg.dot(solve(mg));
  }

 private:
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  VectorXd mass_;
};

double step_average_product(const VectorXd& a, const VectorXd& b, const VectorXd& eta, double dt) {
  double s = 0.0;
  for (Index n = 0; n + 1 < a.size(); ++n) s += 0.25 * eta[n] * (a[n] + a[n + 1]) * (b[n] + b[n + 1]);
  return dt * s;
}

double smallest_ritz_value(const std::vector<double>& alpha, const std::vector<double>& beta) {
  const auto k = static_cast<Index>(alpha.size());
  if (k == 0) return 0.0;
  VectorXd diag(k), sub(std::max<Index>(k - 1, 1));
  for (Index i = 0; i < k; ++i) {
    diag[i] = 1.0 / alpha[i] + (i > 0 ? beta[i - 1] / alpha[i - 1] : 0.0);
    if (i + 1 < k) sub[i] = std::sqrt(beta[i]) / alpha[i];
  }
  if (k == 1) return diag[0];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub.head(k - 1), Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

}  // namespace

ActiveSides parse_active_sides(const std::string& name) {
  if (name == "both") return ActiveSides::Both;
  if (name == "right-only") return ActiveSides::RightOnly;
  throw Error(ErrorKind::Config, "unknown active sides '" + name + "' (both | right-only)");
}

std::string to_string(ActiveSides sides) { return sides == ActiveSides::Both ? "both" : "right-only"; }

double vminus_norm(const DiscreteOperators& ops, const VectorXd& g) {
  const Index N = ops.size() - 1;
  if (g.size() != ops.size() || g[0] != 0.0 || g[N] != 0.0) {
    throw Error(ErrorKind::Precondition, "vminus_norm needs a node vector with zero endpoints");
  }
  const StiffnessSolve ks(ops);
  return std::sqrt(std::max(0.0, ks.vminus_sq(g.segment(1, N - 1))));
}

double state_norm(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v) {
  const Index n = ops.size() - 2;
  const StiffnessSolve ks(ops);
  const VectorXd yi = y.segment(1, n);
  return std::sqrt(yi.dot(ks.mass().cwiseProduct(yi)) + std::max(0.0, ks.vminus_sq(v.segment(1, n))));
}

double interior_energy(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v) {
  VectorXd yi = y;
  VectorXd vi = v;
  const Index N = y.size() - 1;
  yi[0] = yi[N] = 0.0;
  vi[0] = vi[N] = 0.0;
  return discrete_energy(ops, yi, vi);
}

ControlPair extract_controls(const Trajectory& backward, const Mesh& mesh, ActiveSides active) {
  ControlPair c;
  c.dt = backward.dt;
  c.active = active;
  c.f_d = backward.aflux_d / mesh.a_d;
  c.f_c = active == ActiveSides::Both ? VectorXd(-backward.aflux_c / mesh.a_c)
                                      : VectorXd(VectorXd::Zero(backward.aflux_c.size()));
  return c;
}

ControlPair extract_controls(const Trajectory& backward, const Mesh& mesh, ActiveSides active,
                             const VectorXd& eta_mid, double eta0) {
  const Index steps = backward.steps();
  if (eta_mid.size() != steps) throw Error(ErrorKind::Precondition, "time weight does not match the time grid");
  auto build = [&](const VectorXd& q, double scale) {
    VectorXd f(steps + 1);
    f[0] = eta0 * scale * q[0];
    for (Index n = 0; n < steps; ++n) f[n + 1] = eta_mid[n] * scale * (q[n] + q[n + 1]) - f[n];
    return f;
  };
  ControlPair c;
  c.dt = backward.dt;
  c.active = active;
  c.f_d = build(backward.aflux_d, 1.0 / mesh.a_d);
  c.f_c = active == ActiveSides::Both ? build(backward.aflux_c, -1.0 / mesh.a_c)
                                      : VectorXd(VectorXd::Zero(steps + 1));
  return c;
}

double time_weight(double t, double T, double ramp) {
  if (!(ramp > 0.0)) return 1.0;
  const double width = ramp * T;
  const double s = std::clamp(std::min(t, T - t) / width, 0.0, 1.0);
  const double s4 = s * s * s * s;
  return s4 * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s);
}

double hum_time_step(const Mesh& mesh, double T, const SolverOptions& options) {
  if (!(T > 0.0)) throw Error(ErrorKind::Precondition, "control horizon T must be positive");
  const double dt = options.dt > 0.0 ? options.dt : cfl_dt(mesh, options.cfl_safety);
  const auto steps = static_cast<Index>(std::ceil(T / dt - 1e-9));
  return T / static_cast<double>(steps);
}

VectorXd stack(const FinalData& z) {
  const Index n = z.w0.size() - 2;
  VectorXd Z(2 * n);
  Z << z.w0.segment(1, n), z.w1.segment(1, n);
  return Z;
}

FinalData unstack(const VectorXd& Z) {
  const Index n = Z.size() / 2;
  return {embed(Z.head(n)), embed(Z.tail(n))};
}

Gramian::Gramian(const Mesh& mesh, const DiscreteOperators& ops, double T, ActiveSides active,
                 const SolverOptions& options, double ramp)
    : mesh_(mesh), ops_(ops), T_(T), active_(active), options_(options), n_(ops.size() - 2) {
  if (!(ramp >= 0.0 && ramp <= 0.5)) throw Error(ErrorKind::Precondition, "time ramp must lie in [0, 0.5]");
  options_.dt = hum_time_step(mesh, T, options);
  options_.state_stride = 0;
  const auto steps = static_cast<Index>(std::llround(T / options_.dt));
  eta_mid_.resize(steps);
  for (Index n = 0; n < steps; ++n) {
    eta_mid_[n] = time_weight((static_cast<double>(n) + 0.5) * options_.dt, T, ramp);
  }
  eta0_ = time_weight(0.0, T, ramp);
}

Trajectory Gramian::backward(const VectorXd& Z) const {
  if (Z.size() != 2 * n_) throw Error(ErrorKind::Precondition, "adjoint final data has the wrong length");
  return solve_backward(mesh_, ops_, embed(Z.head(n_)), embed(Z.tail(n_)), T_, options_);
}

ControlPair Gramian::controls(const VectorXd& Z) const {
  return extract_controls(backward(Z), mesh_, active_, eta_mid_, eta0_);
}

Trajectory Gramian::drive(const VectorXd& y0, const VectorXd& y1, const ControlPair& controls) const {
  VectorXd start = y0;
  const Index N = start.size() - 1;
  const auto b = controls.boundary_data();
  start[0] = b.value_c(0.0);
  start[N] = b.value_d(0.0);
  return solve_forward(mesh_, ops_, start, y1, b, T_, options_);
}

VectorXd Gramian::apply(const VectorXd& Z) const {
  const auto c = controls(Z);
  const auto tr = drive(VectorXd::Zero(n_ + 2), VectorXd::Zero(n_ + 2), c);
  const VectorXd m = ops_.mass.segment(1, n_);
  VectorXd out(2 * n_);
  out << -m.cwiseProduct(tr.v_end.segment(1, n_)), m.cwiseProduct(tr.y_end.segment(1, n_));
  return out;
}

double Gramian::bilinear(const VectorXd& Z, const VectorXd& Zhat) const {
  const auto a = backward(Z);
  const auto b = backward(Zhat);
  double s = step_average_product(a.aflux_d, b.aflux_d, eta_mid_, a.dt) / mesh_.a_d;
  if (active_ == ActiveSides::Both) s += step_average_product(a.aflux_c, b.aflux_c, eta_mid_, a.dt) / mesh_.a_c;
  return s;
}

FinalData gramian_apply(const Mesh& mesh, const DiscreteOperators& ops, double T, const FinalData& z,
                        ActiveSides active, const SolverOptions& options) {
  const Index N = z.w0.size() - 1;
  if (z.w0.size() != ops.size() || z.w1.size() != ops.size() || z.w0[0] != 0.0 || z.w0[N] != 0.0) {
    throw Error(ErrorKind::Precondition, "final data must be node vectors with zero end displacements");
  }
  const Gramian g(mesh, ops, T, active, options);
  return unstack(g.apply(stack(z)));
}

HumReport verify_null(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0, const VectorXd& y1,
                      const ControlPair& controls, double T, const SolverOptions& options) {
  SolverOptions opt = options;
  opt.dt = controls.dt > 0.0 ? controls.dt : hum_time_step(mesh, T, options);
  opt.state_stride = 0;
  const Gramian g(mesh, ops, T, controls.active, opt);
  const auto tr = g.drive(y0, y1, controls);
  HumReport r;
  r.terminal_energy = interior_energy(ops, tr.y_end, tr.v_end);
  r.terminal_state_norm = state_norm(ops, tr.y_end, tr.v_end);
  r.initial_state_norm = state_norm(ops, y0, y1);
  const double cc = controls.f_c.size() > 1 ? trapezoid(controls.f_c.array().square().matrix(), controls.dt) : 0.0;
  const double cd = controls.f_d.size() > 1 ? trapezoid(controls.f_d.array().square().matrix(), controls.dt) : 0.0;
  r.control_l2 = std::sqrt(cc + cd);
  return r;
}

HumResult solve_hum(const Weight& w, const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0,
                    const VectorXd& y1, double T, const HumOptions& options) {
  if (!(T > 0.0)) throw Error(ErrorKind::Precondition, "control horizon T must be positive");
  if (y0.size() != ops.size() || y1.size() != ops.size()) {
    throw Error(ErrorKind::Precondition, "initial data must have one value per mesh node");
  }
  if (options.maxiter < 1) throw Error(ErrorKind::Precondition, "maxiter must be >= 1");
  const Index n = ops.size() - 2;
  const auto report_w = analyze(w);

  HumResult out;
  out.report.decoupled = report_w.cls == DegeneracyClass::Strong;
  if (T <= report_w.Ta) {
    out.report.warnings.push_back("T = " + std::to_string(T) + " does not exceed the observability time " +
                                  std::to_string(report_w.Ta));
  }
  out.y0 = y0;
  out.y1 = y1;
  out.y0[0] = out.y0[n + 1] = 0.0;
  out.y1[0] = out.y1[n + 1] = 0.0;

  const Gramian gram(mesh, ops, T, options.active, options.solver, options.time_ramp);
  const StiffnessSolve ks(ops);
  const VectorXd m = ops.mass.segment(1, n);

  // With filtering, the data are projected on the low modes and the adjoint
  // final data are sought in a wider modal span, Z = (Phi a, Phi b). CG then runs
  // on the modal coefficients (a, b), where the V^1 x L2 preconditioner is
  // diag(lambda, 1).
  const bool filtered = options.filter_frac < 1.0;
  ModalBasis basis;
  Eigen::MatrixXd phi;
  if (filtered) {
    const Index kd = filtered_mode_count(mesh, options.filter_frac);
    const Index kz = std::max(kd, filtered_mode_count(mesh, options.control_frac));
    basis = low_modes(ops, kz);
    ModalBasis data_basis;
    data_basis.eigenvalues = basis.eigenvalues.head(kd);
    data_basis.vectors = basis.vectors.leftCols(kd);
    out.y0 = project(data_basis, ops, out.y0);
    out.y1 = project(data_basis, ops, out.y1);
    phi = basis.vectors.middleRows(1, n);
  }
  const Index k = filtered ? basis.count() : n;
  auto lift = [&](const VectorXd& c) {
    if (!filtered) return c;
    VectorXd Z(2 * n);
    Z << phi * c.head(k), phi * c.tail(k);
    return Z;
  };
  auto restrict_dual = [&](const VectorXd& R) {
    if (!filtered) return R;
    VectorXd c(2 * k);
    c << phi.transpose() * R.head(n), phi.transpose() * R.tail(n);
    return c;
  };
  auto precondition = [&](const VectorXd& R) {
    VectorXd S(R.size());
    if (filtered) {
      S << R.head(k).cwiseQuotient(basis.eigenvalues), R.tail(k);
    } else {
      S << ks.solve(R.head(n)), R.tail(n).cwiseQuotient(m);
    }
    return S;
  };

  // Right-hand side from the uncontrolled evolution.
  const auto free_run = solve_forward(mesh, ops, out.y0, out.y1, BoundaryData::zero(), T, gram.solver_options());
  out.report.uncontrolled_terminal_energy = interior_energy(ops, free_run.y_end, free_run.v_end);
  out.report.uncontrolled_terminal_norm = state_norm(ops, free_run.y_end, free_run.v_end);
  out.report.initial_state_norm = state_norm(ops, out.y0, out.y1);
  VectorXd r_full(2 * n);
  r_full << m.cwiseProduct(free_run.v_end.segment(1, n)), -m.cwiseProduct(free_run.y_end.segment(1, n));
  const VectorXd r = restrict_dual(r_full);

  VectorXd C = VectorXd::Zero(2 * k);
  VectorXd R = r;
  VectorXd S = precondition(R);
  double rho = R.dot(S);
  const double rho0 = rho;
  std::vector<double> alphas, betas;
  bool converged = !(rho0 > 0.0);
  int it = 0;
  // Without convergence the iterate of smallest residual is returned; on a
  // nearly singular Gramian the later iterates can grow without bound.
  VectorXd C_best = C;
  double best = 1.0;
  int it_best = 0;
  if (!converged) {
    out.report.residual_history.push_back(1.0);
    VectorXd D = S;
    while (it < options.maxiter) {
      const VectorXd Q = restrict_dual(gram.apply(lift(D)));
      const double dq = D.dot(Q);
      if (!(dq > 0.0)) {
        out.report.warnings.push_back("Gramian lost positive definiteness on the Krylov space");
        break;
      }
      const double alpha = rho / dq;
      C += alpha * D;
      R -= alpha * Q;
      S = precondition(R);
      const double rho_new = R.dot(S);
      ++it;
      alphas.push_back(alpha);
      const double rel = std::sqrt(std::max(rho_new, 0.0) / rho0);
      out.report.residual_history.push_back(rel);
      out.report.objective_history.push_back(-0.5 * (r.dot(C) + C.dot(R)));
      if (rel < best) {
        best = rel;
        C_best = C;
        it_best = it;
      }
      if (rel <= options.tol) {
        converged = true;
        break;
      }
      const double beta = rho_new / rho;
      betas.push_back(beta);
      rho = rho_new;
      D = S + beta * D;
    }
  }
  if (!converged) C = C_best;
  const VectorXd Z = lift(C);
  out.Z = Z;
  out.report.iterations = it;
  out.report.cg_residual = out.report.residual_history.empty() ? 0.0 : converged ? out.report.residual_history.back() : best;
  out.report.lambda_coercivity_estimate = smallest_ritz_value(alphas, betas);
  out.report.converged = converged;

  out.controls = gram.controls(Z);
  const auto check = verify_null(mesh, ops, out.y0, out.y1, out.controls, T, gram.solver_options());
  out.report.terminal_energy = check.terminal_energy;
  out.report.terminal_state_norm = check.terminal_state_norm;
  out.report.control_l2 = check.control_l2;

  if (!converged) {
    const std::string msg = "HUM conjugate gradient stopped after " + std::to_string(it) +
                            " iterations; best relative residual " + std::to_string(best) + " at iteration " +
                            std::to_string(it_best);
    throw NonConvergenceError(msg, std::move(out));
  }
  return out;
}

}  // namespace degenwave
