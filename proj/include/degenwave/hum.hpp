#pragma once

// Boundary null controls by the Hilbert Uniqueness Method.
//
// Final data Z = (w_T, u_T) of the adjoint problem live on the interior nodes
// and are stored stacked as one vector of length 2(N-1). The Gramian maps Z to
// the pair (-M v(T), M y(T)) produced by driving the system from rest with
// the controls extracted from the adjoint traces. The controls enter the
// scheme only through their step averages, so the adjoint traces are the
// conservative fluxes averaged over each step as well; with that pairing the
// discrete Gramian is exactly symmetric.

#include <string>
#include <vector>

#include "degenwave/error.hpp"
#include "degenwave/modes.hpp"
#include "degenwave/solver.hpp"

namespace degenwave {

enum class ActiveSides { Both, RightOnly };

ActiveSides parse_active_sides(const std::string& name);
std::string to_string(ActiveSides sides);

struct FinalData {
  VectorXd w0;  // node vector, zero endpoints
  VectorXd w1;  // node vector
};

struct ControlPair {
  VectorXd f_c;
  VectorXd f_d;
  double dt = 0.0;
  ActiveSides active = ActiveSides::Both;

  BoundaryData boundary_data() const { return {f_c, f_d, dt}; }
};

struct HumReport {
  int iterations = 0;
  double cg_residual = 0.0;  // relative, in the V^-1 x L2 dual metric
  double terminal_energy = 0.0;
  double terminal_state_norm = 0.0;  // L2 x V^-1 norm of (y(T), y_t(T))
  double initial_state_norm = 0.0;
  double uncontrolled_terminal_energy = 0.0;
  double uncontrolled_terminal_norm = 0.0;
  double control_l2 = 0.0;
  double lambda_coercivity_estimate = 0.0;
  bool converged = false;
  bool decoupled = false;
  std::vector<double> residual_history;
  /// CG objective 1/2 <G Z, Z> - <r, Z> after each iteration.
  std::vector<double> objective_history;
  std::vector<std::string> warnings;
};

struct HumOptions {
  double tol = 1e-8;
  int maxiter = 500;
  double filter_frac = 0.25;  // 1 leaves the data unfiltered
  /// Fraction of modes spanned by the adjoint final data when filtering.
  double control_frac = 0.5;
  /// Fraction of T over which the control weight ramps up and down.
  double time_ramp = 0.1;
  ActiveSides active = ActiveSides::Both;
  SolverOptions solver;
};

/// sqrt(g^T M K^-1 M g) over the interior nodes.
double vminus_norm(const DiscreteOperators& ops, const VectorXd& g);

/// sqrt(||y||^2_M + ||v||^2_{V^-1}) over the interior nodes.
double state_norm(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v);

/// Energy of the interior part of a state, boundary entries taken as zero.
double interior_energy(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v);

/// f_c = -q_c / a(c), f_d = q_d / a(d) from the conservative flux traces q of
/// a backward trajectory. RightOnly zeroes f_c.
ControlPair extract_controls(const Trajectory& backward, const Mesh& mesh, ActiveSides active);

/// Weighted variant: the step averages of the controls equal eta_{n+1/2}
/// times the step averages of -q_c / a(c) and q_d / a(d). Node values follow
/// from f^0 = eta(0) (-q^0 / a) and f^{n+1} = 2 fbar^{n+1/2} - f^n, which
/// reproduces the unweighted controls exactly when eta = 1.
ControlPair extract_controls(const Trajectory& backward, const Mesh& mesh, ActiveSides active,
                             const VectorXd& eta_mid, double eta0);

/// Time weight: 1 in the middle of [0, T], rising from 0 over the first and
/// falling to 0 over the last `ramp * T` through a C^3 smoothstep. ramp = 0
/// gives eta = 1.
double time_weight(double t, double T, double ramp);

/// Reusable Gramian with a fixed time grid.
class Gramian {
 public:
  Gramian(const Mesh& mesh, const DiscreteOperators& ops, double T, ActiveSides active,
          const SolverOptions& options, double ramp = 0.0);

  Index interior() const { return n_; }
  double dt() const { return options_.dt; }
  double T() const { return T_; }
  const SolverOptions& solver_options() const { return options_; }

  Trajectory backward(const VectorXd& Z) const;
  ControlPair controls(const VectorXd& Z) const;
  VectorXd apply(const VectorXd& Z) const;

  /// Forward run from (y0, y1) driven by the controls; the boundary entries of
  /// y0 are replaced by the controls at t = 0.
  Trajectory drive(const VectorXd& y0, const VectorXd& y1, const ControlPair& controls) const;

  /// Lambda(Z, Zhat) = sum_n dt eta_{n+1/2} [qbar_c qhatbar_c / a(c) + qbar_d qhatbar_d / a(d)].
  double bilinear(const VectorXd& Z, const VectorXd& Zhat) const;

 private:
  const Mesh& mesh_;
  const DiscreteOperators& ops_;
  double T_;
  ActiveSides active_;
  SolverOptions options_;
  Index n_;
  VectorXd eta_mid_;
  double eta0_ = 1.0;
};

VectorXd stack(const FinalData& z);
FinalData unstack(const VectorXd& Z);

FinalData gramian_apply(const Mesh& mesh, const DiscreteOperators& ops, double T, const FinalData& z,
                        ActiveSides active, const SolverOptions& options);

struct HumResult {
  ControlPair controls;
  HumReport report;
  VectorXd Z;        // converged adjoint final data, stacked
  VectorXd y0, y1;   // data actually steered to rest (after filtering)
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, HumResult partial)
      : Error(ErrorKind::NonConvergence, what), partial_(std::move(partial)) {}
  const HumResult& partial() const { return partial_; }
  const std::vector<double>& residual_history() const { return partial_.report.residual_history; }

 private:
  HumResult partial_;
};

/// Preconditioned CG on G Z = r. With filter_frac < 1 the data are projected
/// on the lowest ceil(filter_frac N) modes, Z is sought in the span of the
/// lowest ceil(control_frac N) modes and the preconditioner is diag(lambda, 1)
/// on modal coefficients; otherwise Z ranges over all interior nodes with
/// preconditioner diag(K, M). Throws NonConvergenceError (carrying the
/// iterate of smallest residual) when maxiter is reached.
HumResult solve_hum(const Weight& w, const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0,
                    const VectorXd& y1, double T, const HumOptions& options);

HumReport verify_null(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0, const VectorXd& y1,
                      const ControlPair& controls, double T, const SolverOptions& options);

/// Shared time step for every solve of a HUM run: the requested dt (or the CFL
/// choice) shrunk so that T is an integer number of steps.
double hum_time_step(const Mesh& mesh, double T, const SolverOptions& options);

}  // namespace degenwave
