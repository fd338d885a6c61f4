#pragma once

// Vertex-centred finite-volume discretisation of -(a y_x)_x on [c, d] with a
// node at x = 1. The flux a y_x is only ever formed at cell midpoints.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <iosfwd>

#include "degenwave/weights.hpp"

namespace degenwave {

using Eigen::Index;
using Eigen::VectorXd;

struct Mesh {
  VectorXd nodes;   // x_0 = c < ... < x_N = d
  VectorXd h;       // cell widths, size N
  VectorXd mass;    // lumped dual-cell lengths, size N + 1
  VectorXd offset;  // x - 1 at the nodes, accumulated from cell widths
  VectorXd x_mid;   // cell midpoints
  VectorXd s_mid;   // x_mid - 1 without cancellation
  VectorXd a_mid;   // a at midpoints (> 0)
  VectorXd da_mid;  // a' at midpoints
  VectorXd a_node;  // a at nodes; zero at j1 for degenerate weights
  Index j1 = 0;     // index of the node x = 1
  double grading = 1.0;
  double a_c = 1.0;  // a(c)
  double a_d = 1.0;  // a(d)
  DomainSpec domain;

  Index cells() const { return h.size(); }
  Index size() const { return nodes.size(); }
};

/// Geometric grading toward x = 1 with consecutive cell ratio `grading`
/// (1 = uniform). N must be even and >= 8.
Mesh build_mesh(const Weight& w, int N, double grading);

/// Two-column text dump (x, a(x)) at the nodes.
void write_mesh(std::ostream& os, const Mesh& mesh);

/// Stiffness in conductance form: cell k couples nodes k and k+1 with
/// g_k = a_mid_k / h_k. `interior` is the SPD block on nodes 1..N-1.
struct DiscreteOperators {
  VectorXd conductance;
  VectorXd mass;
  Eigen::SparseMatrix<double> interior;
  Index size() const { return mass.size(); }
};

DiscreteOperators make_operators(const Mesh& mesh);

/// (A y)_i = -[g_i (y_{i+1}-y_i) - g_{i-1} (y_i - y_{i-1})] / m_i, with rows 0
/// and N set to zero.
VectorXd apply_stiffness(const DiscreteOperators& ops, const VectorXd& y);

/// Energy form <A y, z>_lumped = sum_k g_k (y_{k+1}-y_k)(z_{k+1}-z_k).
double stiffness_form(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& z);

/// Lumped L2 inner product.
double mass_dot(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& z);

/// 1/2 sum m_i v_i^2 + 1/2 sum_k a_mid (dy/h)^2 h.
double discrete_energy(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v);

struct BoundaryPair {
  double c;
  double d;
};

/// Second-order one-sided y_x at x = c and x = d.
BoundaryPair boundary_flux(const Mesh& mesh, const VectorXd& y);

/// Boundary fluxes a y_x read from the first and last cell, g_0 (y_1 - y_0) and
/// g_{N-1} (y_N - y_{N-1}). These are the traces paired exactly with Dirichlet
/// data by the discrete Green identity, so the control solver uses them.
BoundaryPair conservative_flux(const DiscreteOperators& ops, const VectorXd& y);

}  // namespace degenwave
