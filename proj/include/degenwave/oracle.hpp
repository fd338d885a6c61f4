#pragma once

// Reference computations for the tests: the eigenmode series of the uniform
// string, fine-grid self-convergence and the strong-regime decoupling check.

#include <functional>
#include <string>
#include <vector>

#include "degenwave/solver.hpp"

namespace degenwave {

/// Solution of y_tt = s^2 y_xx on (c, d) with homogeneous Dirichlet data,
/// y(t,x) = sum_k [b_k cos(w_k t) + e_k sin(w_k t) / w_k] phi_k(x) with
/// phi_k(x) = sin(k pi (x - c) / L) and w_k = s k pi / L.
class UniformStringReference {
 public:
  /// Coefficients given directly; entry k-1 belongs to mode k.
  UniformStringReference(double c, double d, double wave_speed, VectorXd b, VectorXd e);

  /// Sine coefficients of y0 and y1 by composite Simpson quadrature on
  /// `samples` panels, truncated at `modes`.
  static UniformStringReference from_functions(double c, double d, double wave_speed,
                                               const std::function<double(double)>& y0,
                                               const std::function<double(double)>& y1, int modes = 256,
                                               int samples = 8192);

  double operator()(double t, double x) const;
  double velocity(double t, double x) const;

  /// 1/2 int (y_t^2 + s^2 y_x^2) of the truncated series.
  double energy(double t) const;

  /// Bound on the L2 distance between the truncated series and the full
  /// solution at any time, from Bessel's inequality on y0 and y1.
  double tail_bound() const { return tail_bound_; }

  int modes() const { return static_cast<int>(b_.size()); }
  double frequency(int k) const;

 private:
  double c_, d_, speed_;
  VectorXd b_, e_;
  double tail_bound_ = 0.0;
};

/// Orders p_i = log(e_i / e_{i+1}) / log(N_{i+1} / N_i) between consecutive
/// sizes. Needs positive errors.
std::vector<double> observed_orders(const std::vector<int>& N, const std::vector<double>& errors);

struct GridFunction {
  VectorXd nodes;
  VectorXd values;
};

struct ConvergenceTable {
  std::vector<int> N;              // coarse sizes, ascending (finest excluded)
  int reference_N = 0;             // finest size, used as the reference
  std::vector<double> error;       // discrete L2 distance to the reference
  std::vector<double> raw_orders;  // consecutive orders of the raw errors
  /// Order q solving (N_i^-q - N_f^-q) / (N_{i+1}^-q - N_f^-q) = e_i / e_{i+1}
  /// for the last coarse pair, which removes the bias of a finite reference.
  double observed_order = 0.0;
  std::vector<std::string> warnings;
};

/// run(N) returns the terminal state on its own mesh. The reference is
/// interpolated linearly onto each coarse mesh.
ConvergenceTable self_convergence(const std::function<GridFunction(int)>& run, std::vector<int> N_list);

enum class DataSide { Left, Right };

struct DecouplingResult {
  double max_leak = 0.0;  // max over stored times of E_other / E_total
  double final_leak = 0.0;
  double total_energy = 0.0;
  std::vector<double> times;
  std::vector<double> leak;
};

/// Energy of the part of a state strictly on one side of x = 1: the cells on
/// that side plus the lumped kinetic energy of its nodes, with half of the
/// kinetic energy of the node at 1.
double side_energy(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v,
                   DataSide side);

/// Forward run from a smooth bump supported in the middle 60% of the `side`
/// subinterval, zero velocity. Only for Strong weights.
DecouplingResult decoupling_check(const Weight& w, const Mesh& mesh, const DiscreteOperators& ops, double T,
                                  DataSide side, const SolverOptions& options, int sample_stride = 5);

/// Same check from caller-supplied data, assumed supported on `side`. Zero
/// data give zero leak.
DecouplingResult decoupling_check(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0,
                                  const VectorXd& y1, double T, DataSide side, const SolverOptions& options,
                                  int sample_stride = 5);

/// sin^4 bump on (lo, hi), zero outside.
double bump(double x, double lo, double hi);

}  // namespace degenwave
