#pragma once

// Time integration of y_tt = (a y_x)_x with Dirichlet boundary data imposed
// strongly at x = c and x = d.

#include <iosfwd>
#include <string>
#include <vector>

#include "degenwave/mesh.hpp"

namespace degenwave {

enum class Scheme { Leapfrog, ImplicitMidpoint };
enum class LinearSolver { Direct, ConjugateGradient };

Scheme parse_scheme(const std::string& name);
std::string to_string(Scheme scheme);

struct SolverOptions {
  Scheme scheme = Scheme::ImplicitMidpoint;
  /// Time step; 0 selects cfl_dt(mesh, cfl_safety). The step is shrunk so that
  /// an integer number of steps lands exactly on T.
  double dt = 0.0;
  double cfl_safety = 0.5;
  /// Direct is a sparse LDL^T factorisation computed once per run.
  LinearSolver linear_solver = LinearSolver::Direct;
  double cg_tolerance = 1e-12;
  /// Keep (y, v) every `state_stride` steps; 0 keeps only the end states.
  int state_stride = 0;
};

/// Dirichlet data sampled at t_k = k dt, piecewise linear in between and held
/// constant past the last sample. Empty samples mean homogeneous data.
struct BoundaryData {
  VectorXd f_c;
  VectorXd f_d;
  double dt = 0.0;

  static BoundaryData zero() { return {}; }
  double value_c(double t) const { return sample(f_c, t); }
  double value_d(double t) const { return sample(f_d, t); }

 private:
  double sample(const VectorXd& f, double t) const;
};

struct Trajectory {
  VectorXd times;
  VectorXd energy;
  VectorXd flux_c;   // y_x(t, c), second-order one-sided difference
  VectorXd flux_d;   // y_x(t, d)
  VectorXd aflux_c;  // a y_x at x = c from the first cell (conservative trace)
  VectorXd aflux_d;  // a y_x at x = d from the last cell
  std::vector<double> state_times;
  std::vector<VectorXd> ys;
  std::vector<VectorXd> vs;
  VectorXd y_start, v_start;  // states at times.front()
  VectorXd y_end, v_end;      // states at times.back()
  double dt = 0.0;
  int state_stride = 0;

  Index steps() const { return times.size() - 1; }
};

/// dt = safety * min over cells of h / sqrt(max a on the cell).
double cfl_dt(const Mesh& mesh, double safety);

Trajectory solve_forward(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0,
                         const VectorXd& y1, const BoundaryData& bdata, double T,
                         const SolverOptions& options);

/// Backward problem with final data (wT0, wT1) and homogeneous Dirichlet
/// conditions, integrated forward in s = T - t. Returned in original time.
Trajectory solve_backward(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& wT0,
                          const VectorXd& wT1, double T, const SolverOptions& options);

/// Trapezoidal rule over the trajectory time grid.
double trapezoid(const VectorXd& values, double dt);

/// CSV (t, E, flux_c, flux_d).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);

/// Binary snapshots: per stored state, t (double), n (int64), y[n], v[n].
void write_snapshots(std::ostream& os, const Trajectory& traj);

}  // namespace degenwave
