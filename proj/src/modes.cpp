#include "degenwave/modes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kTiny = std::numeric_limits<double>::min();

// Interior tridiagonal pencil: diagonal of K, coupling -g between consecutive
// interior nodes, and the lumped masses.
struct Pencil {
  VectorXd diag;
  VectorXd coupling;  // coupling[i] joins interior nodes i-1 and i (i >= 1)
  VectorXd mass;

  explicit Pencil(const DiscreteOperators& ops) {
    const auto& g = ops.conductance;
    const Index n = ops.size() - 2;
    diag.resize(n);
    coupling = VectorXd::Zero(n);
    mass = ops.mass.segment(1, n);
    for (Index i = 0; i < n; ++i) {
      diag[i] = g[i] + g[i + 1];
      if (i > 0) coupling[i] = g[i];
    }
  }

  Index size() const { return diag.size(); }

  // Number of eigenvalues below lambda.
  Index count_below(double lambda) const {
    Index neg = 0;
    double d = 1.0;
    for (Index i = 0; i < size(); ++i) {
      const double off = i > 0 ? coupling[i] * coupling[i] / d : 0.0;
      d = diag[i] - lambda * mass[i] - off;
      if (d == 0.0) d = kTiny;
      if (d < 0.0) ++neg;
    }
    return neg;
  }

  double upper_bound() const {
    double ub = 0.0;
    for (Index i = 0; i < size(); ++i) {
      const double right = i + 1 < size() ? coupling[i + 1] : 0.0;
      ub = std::max(ub, (diag[i] + coupling[i] + right) / mass[i]);
    }
    return 2.0 * ub;
  }

  // Solves (K - shift M) x = b by an LDL^T sweep with tiny-pivot guarding.
  VectorXd solve_shifted(double shift, const VectorXd& b) const {
    const Index n = size();
    VectorXd d(n), l(n), x(n);
    for (Index i = 0; i < n; ++i) {
      const double a = diag[i] - shift * mass[i];
      if (i == 0) {
        d[i] = a;
      } else {
        l[i] = -coupling[i] / d[i - 1];
        d[i] = a + l[i] * coupling[i];
      }
      const double guard = 1e-14 * (std::abs(diag[i]) + std::abs(shift) * mass[i]);
      if (std::abs(d[i]) < guard) d[i] = d[i] < 0.0 ? -guard : guard;
    }
    x[0] = b[0];
    for (Index i = 1; i < n; ++i) x[i] = b[i] - l[i] * x[i - 1];
    x[n - 1] /= d[n - 1];
    for (Index i = n - 2; i >= 0; --i) x[i] = x[i] / d[i] - l[i + 1] * x[i + 1];
    return x;
  }
};

double bisect(const Pencil& pencil, Index k, double lo, double hi) {
  for (int it = 0; it < 2000; ++it) {
    const double mid = lo > 0.0 && hi / lo > 4.0 ? std::sqrt(lo * hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (pencil.count_below(mid) > k) {
      hi = mid;
    } else {
      lo = mid;
    }
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

Index filtered_mode_count(const Mesh& mesh, double filter_frac) {
  if (!(filter_frac > 0.0 && filter_frac <= 1.0)) {
    throw Error(ErrorKind::Precondition, "filter_frac must lie in (0, 1]");
  }
  const auto N = static_cast<double>(mesh.cells());
  const auto k = static_cast<Index>(std::ceil(filter_frac * N - 1e-9));
  return std::clamp<Index>(k, 1, mesh.size() - 2);
}

ModalBasis low_modes(const DiscreteOperators& ops, Index count) {
  const Pencil pencil(ops);
  const Index n = pencil.size();
  if (count < 1 || count > n) {
    throw Error(ErrorKind::Precondition, "requested " + std::to_string(count) + " modes from " +
                                             std::to_string(n) + " interior nodes");
  }
  ModalBasis basis;
  basis.eigenvalues.resize(count);
  Eigen::MatrixXd interior(n, count);
  const double ub = pencil.upper_bound();
  double lo = 0.0;
  for (Index k = 0; k < count; ++k) {
    const double lambda = bisect(pencil, k, lo, ub);
    if (!std::isfinite(lambda) || !(lambda > 0.0)) {
      throw Error(ErrorKind::Solver, "eigenvalue bisection failed for mode " + std::to_string(k));
    }
    basis.eigenvalues[k] = lambda;
    lo = std::max(0.0, lambda * (1.0 - 1e-12));

    // Cluster members computed so far, against which the new vector is kept
    // M-orthogonal.
    Index first = k;
    while (first > 0 && basis.eigenvalues[first - 1] >= lambda * (1.0 - 1e-4)) --first;

    VectorXd x(n);
    for (Index i = 0; i < n; ++i) x[i] = 1.0 + 0.5 * std::sin(0.7 * static_cast<double>(i + 3 * k));
    for (int it = 0; it < 4; ++it) {
      x = pencil.solve_shifted(lambda, (pencil.mass.array() * x.array()).matrix());
      for (int pass = 0; pass < 2; ++pass) {
        for (Index j = first; j < k; ++j) {
          const auto col = interior.col(j);
          x -= (col.array() * pencil.mass.array() * x.array()).sum() * col;
        }
      }
      const double norm = std::sqrt((pencil.mass.array() * x.array().square()).sum());
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw Error(ErrorKind::Solver, "inverse iteration failed for mode " + std::to_string(k));
      }
      x /= norm;
    }
    // Sign convention: the largest component is positive.
    Index pivot = 0;
    x.cwiseAbs().maxCoeff(&pivot);
    if (x[pivot] < 0.0) x = -x;
    interior.col(k) = x;
  }
  basis.vectors = Eigen::MatrixXd::Zero(n + 2, count);
  basis.vectors.middleRows(1, n) = interior;
  return basis;
}

VectorXd modal_coefficients(const ModalBasis& basis, const DiscreteOperators& ops, const VectorXd& y) {
  if (y.size() != basis.vectors.rows()) {
    throw Error(ErrorKind::Precondition, "modal_coefficients: vector length does not match the basis");
  }
  return basis.vectors.transpose() * ops.mass.cwiseProduct(y);
}

VectorXd project(const ModalBasis& basis, const DiscreteOperators& ops, const VectorXd& y) {
  return basis.vectors * modal_coefficients(basis, ops, y);
}

}  // namespace degenwave
