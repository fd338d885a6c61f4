#include "degenwave/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "degenwave/error.hpp"

namespace degenwave {
namespace {

constexpr double kPi = std::numbers::pi;

double simpson(const std::function<double(double)>& f, double lo, double hi, int panels) {
  const double h = (hi - lo) / panels;
  double s = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) s += (i % 2 == 1 ? 4.0 : 2.0) * f(lo + i * h);
  return s * h / 3.0;
}

double interpolate(const VectorXd& nodes, const VectorXd& values, double x) {
  const auto* first = nodes.data();
  const auto* last = first + nodes.size();
  auto it = std::upper_bound(first, last, x);
  if (it == first) return values[0];
  if (it == last) return values[nodes.size() - 1];
  const Index i = (it - first) - 1;
  const double t = (x - nodes[i]) / (nodes[i + 1] - nodes[i]);
  return (1.0 - t) * values[i] + t * values[i + 1];
}

// Order q with (a^-q - f^-q) / (b^-q - f^-q) = ratio, for a < b < f.
double corrected_order(double a, double b, double f, double ratio) {
  auto model = [&](double q) { return (std::pow(a, -q) - std::pow(f, -q)) / (std::pow(b, -q) - std::pow(f, -q)); };
  double lo = 1e-3, hi = 20.0;
  if (!(ratio > model(lo)) || !(ratio < model(hi))) return std::log(ratio) / std::log(b / a);
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (model(mid) < ratio ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

UniformStringReference::UniformStringReference(double c, double d, double wave_speed, VectorXd b, VectorXd e)
    : c_(c), d_(d), speed_(wave_speed), b_(std::move(b)), e_(std::move(e)) {
  if (!(d > c)) throw Error(ErrorKind::Precondition, "string reference needs c < d");
  if (!(wave_speed > 0.0)) throw Error(ErrorKind::Precondition, "wave speed must be positive");
  if (b_.size() != e_.size() || b_.size() == 0) {
    throw Error(ErrorKind::Precondition, "string reference needs matching, nonempty coefficient lists");
  }
}

UniformStringReference UniformStringReference::from_functions(double c, double d, double wave_speed,
                                                              const std::function<double(double)>& y0,
                                                              const std::function<double(double)>& y1,
                                                              int modes, int samples) {
  if (modes < 1) throw Error(ErrorKind::Precondition, "string reference needs at least one mode");
  const int panels = samples + samples % 2;
  const double L = d - c;
  VectorXd b(modes), e(modes);
  for (int k = 1; k <= modes; ++k) {
    auto phi = [&](double x) { return std::sin(k * kPi * (x - c) / L); };
    b[k - 1] = 2.0 / L * simpson([&](double x) { return y0(x) * phi(x); }, c, d, panels);
    e[k - 1] = 2.0 / L * simpson([&](double x) { return y1(x) * phi(x); }, c, d, panels);
  }
  UniformStringReference ref(c, d, wave_speed, b, e);
  const double n0 = simpson([&](double x) { return y0(x) * y0(x); }, c, d, panels);
  const double n1 = simpson([&](double x) { return y1(x) * y1(x); }, c, d, panels);
  const double t0 = std::sqrt(std::max(0.0, n0 - 0.5 * L * b.squaredNorm()));
  const double t1 = std::sqrt(std::max(0.0, n1 - 0.5 * L * e.squaredNorm()));
  ref.tail_bound_ = t0 + t1 / ref.frequency(modes + 1);
  return ref;
}

double UniformStringReference::frequency(int k) const { return speed_ * k * kPi / (d_ - c_); }

double UniformStringReference::operator()(double t, double x) const {
  double y = 0.0;
  for (int k = 1; k <= modes(); ++k) {
    const double w = frequency(k);
    y += (b_[k - 1] * std::cos(w * t) + e_[k - 1] * std::sin(w * t) / w) * std::sin(k * kPi * (x - c_) / (d_ - c_));
  }
  return y;
}

double UniformStringReference::velocity(double t, double x) const {
  double v = 0.0;
  for (int k = 1; k <= modes(); ++k) {
    const double w = frequency(k);
    v += (-b_[k - 1] * w * std::sin(w * t) + e_[k - 1] * std::cos(w * t)) * std::sin(k * kPi * (x - c_) / (d_ - c_));
  }
  return v;
}

double UniformStringReference::energy(double t) const {
  double s = 0.0;
  for (int k = 1; k <= modes(); ++k) {
    const double w = frequency(k);
    const double amp_v = -b_[k - 1] * w * std::sin(w * t) + e_[k - 1] * std::cos(w * t);
    const double amp_y = b_[k - 1] * std::cos(w * t) + e_[k - 1] * std::sin(w * t) / w;
    s += amp_v * amp_v + w * w * amp_y * amp_y;
  }
  return 0.25 * (d_ - c_) * s;
}

std::vector<double> observed_orders(const std::vector<int>& N, const std::vector<double>& errors) {
  if (N.size() != errors.size() || N.size() < 2) {
    throw Error(ErrorKind::Precondition, "observed_orders needs at least two (N, error) pairs");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i + 1 < N.size(); ++i) {
    if (!(errors[i] > 0.0) || !(errors[i + 1] > 0.0)) {
      throw Error(ErrorKind::Precondition, "observed_orders needs positive errors");
    }
    out.push_back(std::log(errors[i] / errors[i + 1]) / std::log(static_cast<double>(N[i + 1]) / N[i]));
  }
  return out;
}

ConvergenceTable self_convergence(const std::function<GridFunction(int)>& run, std::vector<int> N_list) {
  std::sort(N_list.begin(), N_list.end());
  if (std::adjacent_find(N_list.begin(), N_list.end()) != N_list.end()) {
    throw Error(ErrorKind::Precondition, "self_convergence needs distinct mesh sizes");
  }
  if (N_list.size() < 3) throw Error(ErrorKind::Precondition, "self_convergence needs at least 3 mesh sizes");

  ConvergenceTable table;
  table.reference_N = N_list.back();
  const GridFunction ref = run(table.reference_N);
  for (std::size_t i = 0; i + 1 < N_list.size(); ++i) {
    const GridFunction g = run(N_list[i]);
    const Index n = g.nodes.size();
    double s = 0.0;
    for (Index j = 0; j < n; ++j) {
      const double left = j > 0 ? g.nodes[j] - g.nodes[j - 1] : 0.0;
      const double right = j + 1 < n ? g.nodes[j + 1] - g.nodes[j] : 0.0;
      const double diff = g.values[j] - interpolate(ref.nodes, ref.values, g.nodes[j]);
      s += 0.5 * (left + right) * diff * diff;
    }
    table.N.push_back(N_list[i]);
    table.error.push_back(std::sqrt(s));
  }
  for (std::size_t i = 0; i + 1 < table.error.size(); ++i) {
    if (!(table.error[i + 1] < table.error[i])) {
      table.warnings.push_back("errors are not monotone between N = " + std::to_string(table.N[i]) + " and N = " +
                               std::to_string(table.N[i + 1]));
    }
  }
  const bool positive = std::all_of(table.error.begin(), table.error.end(), [](double e) { return e > 0.0; });
  if (!positive) {
    table.warnings.push_back("zero error against the reference; no order can be estimated");
    return table;
  }
  table.raw_orders = observed_orders(table.N, table.error);
  const std::size_t m = table.N.size();
  table.observed_order = corrected_order(table.N[m - 2], table.N[m - 1], table.reference_N,
                                         table.error[m - 2] / table.error[m - 1]);
  return table;
}

double bump(double x, double lo, double hi) {
  if (!(x > lo && x < hi)) return 0.0;
  const double s = std::sin(kPi * (x - lo) / (hi - lo));
  return s * s * s * s;
}

double side_energy(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y, const VectorXd& v,
                   DataSide side) {
  const Index j = mesh.j1;
  const Index N = mesh.cells();
  const Index first = side == DataSide::Left ? 0 : j + 1;
  const Index last = side == DataSide::Left ? j - 1 : N;
  double e = 0.25 * ops.mass[j] * v[j] * v[j];
  for (Index i = first; i <= last; ++i) e += 0.5 * ops.mass[i] * v[i] * v[i];
  const Index cell0 = side == DataSide::Left ? 0 : j;
  const Index cell1 = side == DataSide::Left ? j : N;
  for (Index k = cell0; k < cell1; ++k) {
    const double dy = y[k + 1] - y[k];
    e += 0.5 * ops.conductance[k] * dy * dy;
  }
  return e;
}

DecouplingResult decoupling_check(const Weight& w, const Mesh& mesh, const DiscreteOperators& ops, double T,
                                  DataSide side, const SolverOptions& options, int sample_stride) {
  if (classify(w) != DegeneracyClass::Strong) {
    throw Error(ErrorKind::Precondition, "decoupling_check needs a strongly degenerate weight");
  }
  if (sample_stride < 1) throw Error(ErrorKind::Precondition, "sample_stride must be >= 1");
  const auto& dom = mesh.domain;
  const double lo = side == DataSide::Left ? dom.c : 1.0;
  const double hi = side == DataSide::Left ? 1.0 : dom.d;
  VectorXd y0(mesh.size());
  for (Index i = 0; i < mesh.size(); ++i) y0[i] = bump(mesh.nodes[i], lo + 0.2 * (hi - lo), lo + 0.8 * (hi - lo));
  return decoupling_check(mesh, ops, y0, VectorXd::Zero(mesh.size()), T, side, options, sample_stride);
}

DecouplingResult decoupling_check(const Mesh& mesh, const DiscreteOperators& ops, const VectorXd& y0,
                                  const VectorXd& y1, double T, DataSide side, const SolverOptions& options,
                                  int sample_stride) {
  SolverOptions opt = options;
  opt.state_stride = sample_stride;
  const auto traj = solve_forward(mesh, ops, y0, y1, BoundaryData::zero(), T, opt);
  const DataSide other = side == DataSide::Left ? DataSide::Right : DataSide::Left;
  DecouplingResult r;
  r.total_energy = traj.energy[0];
  for (std::size_t k = 0; k < traj.ys.size(); ++k) {
    const double e = side_energy(mesh, ops, traj.ys[k], traj.vs[k], other);
    const double frac = r.total_energy > 0.0 ? e / r.total_energy : 0.0;
    r.times.push_back(traj.state_times[k]);
    r.leak.push_back(frac);
    r.max_leak = std::max(r.max_leak, frac);
  }
  r.final_leak = r.leak.empty() ? 0.0 : r.leak.back();
  return r;
}

}  // namespace degenwave
