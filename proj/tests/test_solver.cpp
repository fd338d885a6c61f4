#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "degenwave/error.hpp"
#include "degenwave/solver.hpp"

using namespace degenwave;

namespace {

const DomainSpec kUnit{0.0, 2.0, 0.0, 2.0};
constexpr double kPi = std::numbers::pi;

struct Setup {
  Weight w;
  Mesh mesh;
  DiscreteOperators ops;
  Setup(WeightSpec spec, int N, double grading = 1.0)
      : w(std::move(spec), kUnit), mesh(build_mesh(w, N, grading)), ops(make_operators(mesh)) {}
};

VectorXd bump(const Mesh& m, double lo, double hi) {
  VectorXd y = VectorXd::Zero(m.size());
  for (Index i = 0; i < m.size(); ++i) {
    const double x = m.nodes[i];
    if (x > lo && x < hi) {
      const double s = std::sin(kPi * (x - lo) / (hi - lo));
      y[i] = s * s * s;
    }
  }
  return y;
}

double max_rel_drift(const VectorXd& e) { return (e.array() - e[0]).abs().maxCoeff() / e[0]; }

}  // namespace

TEST_CASE("CFL step") {
  const Setup uni(Uniform{}, 8);
  CHECK(cfl_dt(uni.mesh, 1.0) == doctest::Approx(0.25));
  CHECK(cfl_dt(uni.mesh, 0.9) == doctest::Approx(0.225));
  // The cells next to x = 1 allow 0.25 / sqrt(0.125); the outer cells cap the step.
  const Setup deg(SymmetricPower{1.0}, 8);
  CHECK(cfl_dt(deg.mesh, 1.0) == doctest::Approx(0.25));
  CHECK_THROWS_AS(cfl_dt(deg.mesh, 0.0), Error);
  CHECK_THROWS_AS(cfl_dt(deg.mesh, 1.5), Error);
}

TEST_CASE("scheme names") {
  CHECK(parse_scheme("leapfrog") == Scheme::Leapfrog);
  CHECK(parse_scheme(to_string(Scheme::ImplicitMidpoint)) == Scheme::ImplicitMidpoint);
  CHECK_THROWS_AS(parse_scheme("rk4"), Error);
}

TEST_CASE("boundary data interpolation") {
  BoundaryData b;
  b.dt = 0.5;
  b.f_c = VectorXd::LinSpaced(3, 0.0, 1.0);
  CHECK(b.value_c(0.25) == doctest::Approx(0.25));
  CHECK(b.value_c(0.75) == doctest::Approx(0.75));
  CHECK(b.value_c(5.0) == 1.0);
  CHECK(b.value_d(0.3) == 0.0);
}

TEST_CASE("zero data stays zero") {
  const Setup s(SymmetricPower{0.5}, 32);
  for (Scheme sc : {Scheme::Leapfrog, Scheme::ImplicitMidpoint}) {
    SolverOptions opt;
    opt.scheme = sc;
    const auto tr = solve_forward(s.mesh, s.ops, VectorXd::Zero(33), VectorXd::Zero(33), BoundaryData::zero(),
                                  1.0, opt);
    CHECK(tr.energy.cwiseAbs().maxCoeff() == 0.0);
    CHECK(tr.y_end.cwiseAbs().maxCoeff() == 0.0);
    const auto bw = solve_backward(s.mesh, s.ops, VectorXd::Zero(33), VectorXd::Zero(33), 1.0, opt);
    CHECK(bw.flux_c.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("input validation") {
  const Setup s(SymmetricPower{0.5}, 16);
  SolverOptions opt;
  VectorXd y0 = VectorXd::Zero(17);
  CHECK_THROWS_AS(solve_forward(s.mesh, s.ops, y0, VectorXd::Zero(3), BoundaryData::zero(), 1.0, opt), Error);
  CHECK_THROWS_AS(solve_forward(s.mesh, s.ops, y0, y0, BoundaryData::zero(), 0.0, opt), Error);
  y0[0] = 1.0;
  CHECK_THROWS_AS(solve_forward(s.mesh, s.ops, y0, VectorXd::Zero(17), BoundaryData::zero(), 1.0, opt), Error);
  CHECK_THROWS_AS(solve_backward(s.mesh, s.ops, y0, VectorXd::Zero(17), 1.0, opt), Error);
}

TEST_CASE("leapfrog refuses steps above the CFL limit") {
  const Setup s(Uniform{}, 16);
  SolverOptions opt;
  opt.scheme = Scheme::Leapfrog;
  opt.dt = 2.0 * cfl_dt(s.mesh, 1.0);
  try {
    solve_forward(s.mesh, s.ops, VectorXd::Zero(17), VectorXd::Zero(17), BoundaryData::zero(), 1.0, opt);
    FAIL("expected a stability error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Stability);
  }
  opt.scheme = Scheme::ImplicitMidpoint;
  CHECK_NOTHROW(
      solve_forward(s.mesh, s.ops, VectorXd::Zero(17), VectorXd::Zero(17), BoundaryData::zero(), 1.0, opt));
}

TEST_CASE("uniform string standing wave") {
  auto l2_error = [](int N, Scheme sc) {
    const Setup s(Uniform{}, N);
    VectorXd y0(N + 1);
    for (int i = 0; i <= N; ++i) y0[i] = std::sin(kPi * s.mesh.nodes[i] / 2);
    SolverOptions opt;
    opt.scheme = sc;
    opt.dt = 0.25 * cfl_dt(s.mesh, 1.0);
    const auto tr = solve_forward(s.mesh, s.ops, y0, VectorXd::Zero(N + 1), BoundaryData::zero(), 1.0, opt);
    const VectorXd exact = std::cos(kPi / 2) * y0;
    const VectorXd e = tr.y_end - exact;
    return std::sqrt(mass_dot(s.ops, e, e));
  };
  for (Scheme sc : {Scheme::ImplicitMidpoint, Scheme::Leapfrog}) {
    const double e64 = l2_error(64, sc);
    const double e128 = l2_error(128, sc);
    CHECK(e128 < 1e-4);
    CHECK(std::log2(e64 / e128) == doctest::Approx(2.0).epsilon(0.1));
  }
}

TEST_CASE("energy conservation") {
  const Setup s(SymmetricPower{0.5}, 128, 1.05);
  const VectorXd y0 = bump(s.mesh, 0.2, 1.4);
  const VectorXd y1 = bump(s.mesh, 0.7, 1.9);
  SUBCASE("implicit midpoint over 10^4 steps") {
    SolverOptions opt;
    opt.dt = 10.0 / 10000;
    const auto tr = solve_forward(s.mesh, s.ops, y0, y1, BoundaryData::zero(), 10.0, opt);
    CHECK(tr.steps() == 10000);
    CHECK(max_rel_drift(tr.energy) <= 1e-8);
  }
  SUBCASE("implicit midpoint with conjugate gradient") {
    SolverOptions opt;
    opt.dt = 0.01;
    opt.linear_solver = LinearSolver::ConjugateGradient;
    const auto tr = solve_forward(s.mesh, s.ops, y0, y1, BoundaryData::zero(), 5.0, opt);
    CHECK(max_rel_drift(tr.energy) <= 1e-8);
    SolverOptions direct;
    direct.dt = 0.01;
    const auto ref = solve_forward(s.mesh, s.ops, y0, y1, BoundaryData::zero(), 5.0, direct);
    CHECK((tr.y_end - ref.y_end).norm() <= 1e-8 * ref.y_end.norm());
  }
  SUBCASE("leapfrog oscillates without drift") {
    SolverOptions opt;
    opt.scheme = Scheme::Leapfrog;
    opt.cfl_safety = 0.5;
    const auto tr = solve_forward(s.mesh, s.ops, y0, y1, BoundaryData::zero(), 10.0, opt);
    CHECK(max_rel_drift(tr.energy) <= 1e-3);
  }
}

TEST_CASE("time reversal") {
  const Setup s(SymmetricPower{0.7}, 96);
  const VectorXd y0 = bump(s.mesh, 0.3, 1.6);
  const VectorXd y1 = VectorXd::Zero(97);
  SolverOptions opt;
  opt.dt = 0.005;
  const auto fw = solve_forward(s.mesh, s.ops, y0, y1, BoundaryData::zero(), 3.0, opt);
  const auto bw = solve_backward(s.mesh, s.ops, fw.y_end, fw.v_end, 3.0, opt);
  CHECK((bw.y_start - y0).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((bw.v_start - y1).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK(bw.times[0] == 0.0);
  CHECK(bw.times[bw.steps()] == doctest::Approx(3.0));
  CHECK(max_rel_drift(bw.energy) <= 1e-8);
  // Traces of the backward run are the forward traces, read in original time.
  CHECK((bw.flux_c - fw.flux_c).cwiseAbs().maxCoeff() <= 1e-8 * fw.flux_c.cwiseAbs().maxCoeff());
}

TEST_CASE("stored states and exports") {
  const Setup s(SymmetricPower{0.5}, 16);
  SolverOptions opt;
  opt.dt = 0.1;
  opt.state_stride = 3;
  const auto tr = solve_forward(s.mesh, s.ops, bump(s.mesh, 0.2, 0.8), VectorXd::Zero(17), BoundaryData::zero(),
                                1.0, opt);
  CHECK(tr.steps() == 10);
  CHECK(tr.ys.size() == 5);  // steps 0, 3, 6, 9 and the final one
  CHECK(tr.state_times.back() == doctest::Approx(1.0));
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  CHECK(csv.str().rfind("t,E,flux_c,flux_d\n", 0) == 0);
  std::ostringstream bin;
  write_snapshots(bin, tr);
  CHECK(bin.str().size() == 5 * (2 * sizeof(double) + 2 * 17 * sizeof(double)));
}

TEST_CASE("Dirichlet data is imposed") {
  const Setup s(Uniform{}, 32);
  BoundaryData b;
  b.dt = 0.05;
  b.f_c = VectorXd::LinSpaced(21, 0.0, 1.0);
  b.f_d = -b.f_c;
  SolverOptions opt;
  opt.dt = 0.05;
  opt.state_stride = 1;
  const auto tr = solve_forward(s.mesh, s.ops, VectorXd::Zero(33), VectorXd::Zero(33), b, 1.0, opt);
  for (std::size_t k = 0; k < tr.ys.size(); ++k) {
    CHECK(tr.ys[k][0] == doctest::Approx(b.value_c(tr.state_times[k])));
    CHECK(tr.ys[k][32] == doctest::Approx(b.value_d(tr.state_times[k])));
  }
}

TEST_CASE("sides decouple in the strong regime") {
  // Energy found left of x = 1 when the data lives on the right. Steep grading
  // toward 1 makes the conductance of the cells touching 1 vanish quickly.
  auto leak = [](int N) {
    const Setup s(SymmetricPower{1.5}, N, 1.1);
    const VectorXd y0 = bump(s.mesh, 1.2, 1.8);
    SolverOptions opt;
    opt.dt = 0.005;
    opt.state_stride = 4;
    const auto tr = solve_forward(s.mesh, s.ops, y0, VectorXd::Zero(N + 1), BoundaryData::zero(), 6.0, opt);
    const Index j = s.mesh.j1;
    double worst = 0.0;
    for (std::size_t k = 0; k < tr.ys.size(); ++k) {
      const auto& y = tr.ys[k];
      const auto& v = tr.vs[k];
      double e = 0.0;
      for (Index i = 0; i < j; ++i) e += 0.5 * s.ops.mass[i] * v[i] * v[i];
      for (Index c = 0; c < j; ++c) e += 0.5 * s.ops.conductance[c] * (y[c + 1] - y[c]) * (y[c + 1] - y[c]);
      worst = std::max(worst, e / tr.energy[0]);
    }
    return worst;
  };
  const double l256 = leak(256);
  const double l512 = leak(512);
  CHECK(l512 < l256);
  CHECK(l512 < 1e-3);
}
