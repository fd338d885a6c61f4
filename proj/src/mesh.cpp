#include "degenwave/mesh.hpp"

#include <cmath>
#include <ostream>
#include <vector>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

void check_length(const DiscreteOperators& ops, const VectorXd& y, const char* what) {
  if (y.size() != ops.size()) {
    throw Error(ErrorKind::Precondition, std::string(what) + ": vector length " +
                                             std::to_string(y.size()) + " does not match mesh size " +
                                             std::to_string(ops.size()));
  }
}

// Widths of n cells on a side of length L, ordered from the outer boundary
// toward x = 1, shrinking by `ratio` per cell.
std::vector<double> graded_widths(double L, int n, double ratio) {
  std::vector<double> w(n);
  if (ratio == 1.0) {
    for (auto& v : w) v = L / n;
    return w;
  }
  const double q = 1.0 / ratio;
  const double w0 = L * (1.0 - q) / (1.0 - std::pow(q, n));
  for (int k = 0; k < n; ++k) w[k] = w0 * std::pow(q, k);
  return w;
}

}  // namespace

Mesh build_mesh(const Weight& w, int N, double grading) {
  if (N < 8 || N % 2 != 0) {
    throw Error(ErrorKind::Precondition,
                "mesh size N must be even and >= 8 so that x = 1 is a node (got " +
                    std::to_string(N) + ")");
  }
  if (!(grading >= 1.0)) {
    throw Error(ErrorKind::Precondition, "mesh grading must be >= 1");
  }
  const auto& dom = w.domain();
  int n_left = N / 2;
  if (grading == 1.0) {
    const double share = (1.0 - dom.c) / dom.length() * N;
    const double rounded = std::round(share);
    if (std::abs(share - rounded) < 1e-9 && rounded >= 1 && rounded <= N - 1) {
      n_left = static_cast<int>(rounded);
    }
  }
  const int n_right = N - n_left;
  const auto left = graded_widths(1.0 - dom.c, n_left, grading);
  const auto right = graded_widths(dom.d - 1.0, n_right, grading);

  Mesh m;
  m.domain = dom;
  m.grading = grading;
  m.j1 = n_left;
  m.nodes.resize(N + 1);
  m.offset.resize(N + 1);
  m.h.resize(N);
  // Node positions are accumulated as distances from x = 1.
  double dist = 0.0;
  m.offset[n_left] = 0.0;
  for (int k = n_left - 1; k >= 0; --k) {
    dist += left[k];
    m.h[k] = left[k];
    m.offset[k] = -dist;
  }
  m.offset[0] = dom.c - 1.0;
  dist = 0.0;
  for (int k = 0; k < n_right; ++k) {
    dist += right[n_right - 1 - k];
    m.h[n_left + k] = right[n_right - 1 - k];
    m.offset[n_left + k + 1] = dist;
  }
  m.offset[N] = dom.d - 1.0;
  m.nodes = m.offset.array() + 1.0;
  m.nodes[0] = dom.c;
  m.nodes[N] = dom.d;

  m.mass = VectorXd::Zero(N + 1);
  m.x_mid.resize(N);
  m.s_mid.resize(N);
  m.a_mid.resize(N);
  m.da_mid.resize(N);
  for (int k = 0; k < N; ++k) {
    m.mass[k] += 0.5 * m.h[k];
    m.mass[k + 1] += 0.5 * m.h[k];
    m.s_mid[k] = 0.5 * (m.offset[k] + m.offset[k + 1]);
    m.x_mid[k] = 1.0 + m.s_mid[k];
    const auto v = w.eval_offset(m.s_mid[k]);
    m.a_mid[k] = v.a;
    m.da_mid[k] = v.da;
    if (!(v.a > 0.0)) {
      throw Error(ErrorKind::InvalidWeight, "weight vanishes at a cell midpoint; refine differently");
    }
  }
  m.a_node.resize(N + 1);
  for (int k = 0; k <= N; ++k) m.a_node[k] = w.eval_offset(m.offset[k]).a;
  m.a_c = m.a_node[0];
  m.a_d = m.a_node[N];
  return m;
}

void write_mesh(std::ostream& os, const Mesh& mesh) {
  os.precision(17);
  for (Index k = 0; k < mesh.size(); ++k) os << mesh.nodes[k] << ' ' << mesh.a_node[k] << '\n';
}

DiscreteOperators make_operators(const Mesh& mesh) {
  DiscreteOperators ops;
  ops.conductance = mesh.a_mid.cwiseQuotient(mesh.h);
  ops.mass = mesh.mass;
  const Index n = mesh.size() - 2;
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(3 * n);
  const auto& g = ops.conductance;
  for (Index i = 0; i < n; ++i) {
    // Interior node i+1 couples through cells i and i+1.
    entries.emplace_back(i, i, g[i] + g[i + 1]);
    if (i + 1 < n) {
      entries.emplace_back(i, i + 1, -g[i + 1]);
      entries.emplace_back(i + 1, i, -g[i + 1]);
    }
  }
  ops.interior.resize(n, n);
  ops.interior.setFromTriplets(entries.begin(), entries.end());
  return ops;
}

VectorXd apply_stiffness(const DiscreteOperators& ops, const VectorXd& y) {
  check_length(ops, y, "apply_stiffness");
  const Index N = y.size() - 1;
  const auto& g = ops.conductance;
  VectorXd out = VectorXd::Zero(y.size());
  for (Index i = 1; i < N; ++i) {
    const double right = g[i] * (y[i + 1] - y[i]);
    const double left = g[i - 1] * (y[i] - y[i - 1]);
    out[i] = -(right - left) / ops.mass[i];
  }
  return out;
}

double stiffness_form(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& z) {
  check_length(ops, y, "stiffness_form");
  check_length(ops, z, "stiffness_form");
  const Index n = ops.conductance.size();
  const auto dy = y.tail(n) - y.head(n);
  const auto dz = z.tail(n) - z.head(n);
  return (ops.conductance.array() * dy.array() * dz.array()).sum();
}

double mass_dot(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& z) {
  check_length(ops, y, "mass_dot");
  check_length(ops, z, "mass_dot");
  return (ops.mass.array() * y.array() * z.array()).sum();
}

double discrete_energy(const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v) {
  return 0.5 * mass_dot(ops, v, v) + 0.5 * stiffness_form(ops, y, y);
}

BoundaryPair boundary_flux(const Mesh& mesh, const VectorXd& y) {
  const Index N = mesh.size() - 1;
  if (N < 2 || y.size() != mesh.size()) {
    throw Error(ErrorKind::Precondition, "boundary_flux needs at least two cells and a full node vector");
  }
  // Derivative at x0 of the quadratic through (x0,y0), (x0+s1,y1), (x0+s2,y2).
  auto one_sided = [](double s1, double s2, double y0, double y1, double y2) {
    return -(s1 + s2) / (s1 * s2) * y0 + s2 / (s1 * (s2 - s1)) * y1 - s1 / (s2 * (s2 - s1)) * y2;
  };
  const auto& x = mesh.nodes;
  const double fc = one_sided(x[1] - x[0], x[2] - x[0], y[0], y[1], y[2]);
  const double fd = one_sided(x[N - 1] - x[N], x[N - 2] - x[N], y[N], y[N - 1], y[N - 2]);
  return {fc, fd};
}

BoundaryPair conservative_flux(const DiscreteOperators& ops, const VectorXd& y) {
  check_length(ops, y, "conservative_flux");
  const Index N = y.size() - 1;
  const auto& g = ops.conductance;
  return {g[0] * (y[1] - y[0]), g[N - 1] * (y[N] - y[N - 1])};
}

}  // namespace degenwave
