#pragma once

// Lowest eigenpairs of the discrete operator, K phi = lambda M phi on the
// interior nodes, and projections onto their span.

#include <Eigen/Core>

#include "degenwave/mesh.hpp"

namespace degenwave {

struct ModalBasis {
  VectorXd eigenvalues;     // ascending
  Eigen::MatrixXd vectors;  // (N+1) x k node vectors, zero endpoints, M-orthonormal

  Index count() const { return eigenvalues.size(); }
};

/// ceil(filter_frac * N), clamped to the number of interior nodes.
Index filtered_mode_count(const Mesh& mesh, double filter_frac);

/// Bisection on Sturm counts of K - lambda M followed by inverse iteration.
/// Eigenvalues are found to high relative accuracy even when the mesh
/// contains cells many orders of magnitude smaller than the largest.
ModalBasis low_modes(const DiscreteOperators& ops, Index count);

/// M-orthogonal projection of a node vector onto the span of the basis.
VectorXd project(const ModalBasis& basis, const DiscreteOperators& ops, const VectorXd& y);

/// Modal coefficients <y, phi_k>_M.
VectorXd modal_coefficients(const ModalBasis& basis, const DiscreteOperators& ops, const VectorXd& y);

}  // namespace degenwave
