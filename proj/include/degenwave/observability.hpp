#pragma once

// Boundary observation energies, the observability inequality and empirical
// observability constants over random low-frequency ensembles.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "degenwave/modes.hpp"
#include "degenwave/solver.hpp"

namespace degenwave {

struct ObservabilityResult {
  double obs_energy = 0.0;    // int y_x(t,c)^2 + int y_x(t,d)^2
  double weighted_obs = 0.0;  // (1-c) a(c) int y_x(t,c)^2 + (d-1) a(d) int y_x(t,d)^2
  double E0 = 0.0;
  double ratio = 0.0;  // weighted_obs / E0
  double bound = 0.0;  // bracket of the observability inequality times E0
};

/// Trace integrals use the trapezoidal rule on the trajectory time grid. The
/// trajectory must come from homogeneous boundary data; its length gives T.
ObservabilityResult observe(const Trajectory& traj, const Mesh& mesh, const DegeneracyReport& report);

struct EnsembleOptions {
  int ensemble_size = 16;
  std::uint64_t seed = 0;
  double filter_frac = 0.25;
  /// Worker threads; 0 uses the hardware concurrency.
  int workers = 0;
  SolverOptions solver;
};

struct InitialData {
  VectorXd y0;
  VectorXd y1;
};

/// y0 = sum alpha_k phi_k, y1 = sum beta_k sqrt(lambda_k) phi_k with standard
/// normal coefficients drawn from one mt19937_64 stream, members in order.
std::vector<InitialData> make_ensemble(const ModalBasis& basis, int size, std::uint64_t seed);

struct EmpiricalResult {
  double constant = 0.0;  // min over members of weighted_obs / E0
  Index argmin = 0;
  std::vector<ObservabilityResult> members;
};

EmpiricalResult empirical_constant(const Weight& w, const Mesh& mesh, const DiscreteOperators& ops,
                                   double T, const EnsembleOptions& options);

struct MeshParams {
  int N = 512;
  double grading = 1.0;
};

struct SweepRow {
  std::string label;
  double p = 0.0;  // exponent of power weights, NaN for tabulated ones
  double T = 0.0;
  double Ta = 0.0;
  double C_T_theory = 0.0;
  double C_emp = 0.0;
  double slack = 0.0;  // C_emp - C_T_theory * max{(1-c) a(c), (d-1) a(d)}
  bool slope_conditions_ok = false;
};

/// Rows ordered weight-major, then by T. The modal basis of each weight is
/// computed once and reused for every T.
std::vector<SweepRow> sweep(const std::vector<WeightSpec>& family, const DomainSpec& domain,
                            const std::vector<double>& T_list, const MeshParams& mesh_params,
                            const EnsembleOptions& options);

/// True when C_emp strictly decreases along the rows sharing each T.
bool strictly_decreasing_in_family(const std::vector<SweepRow>& rows);

/// Relative residuals of the two integral identities of the homogeneous
/// problem, evaluated on a trajectory stored at every step:
/// the multiplier identity obtained from (x-1) y_x, normalised by its
/// boundary side, and the virial identity obtained from y, normalised by
/// int 2E dt.
struct IdentityResiduals {
  double multiplier = 0.0;
  double virial = 0.0;
  double multiplier_lhs = 0.0;
  double multiplier_rhs = 0.0;
};

IdentityResiduals identity_residuals(const Trajectory& traj, const Mesh& mesh, const DiscreteOperators& ops);

/// Runs fn(i) for i in [0, count) on a pool of `workers` threads.
void parallel_for(Index count, int workers, const std::function<void(Index)>& fn);

}  // namespace degenwave
