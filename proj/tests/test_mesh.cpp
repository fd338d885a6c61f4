#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "degenwave/error.hpp"
#include "degenwave/mesh.hpp"

using namespace degenwave;

namespace {

const DomainSpec kUnit{0.0, 2.0, 0.0, 2.0};

VectorXd sample(const Mesh& m, double (*f)(double)) {
  VectorXd y(m.size());
  for (Index i = 0; i < m.size(); ++i) y[i] = f(m.nodes[i]);
  return y;
}

VectorXd random_interior(Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = g(rng);
  y[0] = 0.0;
  y[n - 1] = 0.0;
  return y;
}

}  // namespace

TEST_CASE("uniform mesh") {
  const Weight w(Uniform{}, kUnit);
  const Mesh m = build_mesh(w, 8, 1.0);
  CHECK(m.size() == 9);
  CHECK(m.j1 == 4);
  CHECK(m.nodes[m.j1] == 1.0);
  for (Index k = 0; k < m.cells(); ++k) CHECK(m.h[k] == doctest::Approx(0.25).epsilon(1e-15));
  for (Index i = 0; i <= 8; ++i) CHECK(m.nodes[i] == doctest::Approx(0.25 * i).epsilon(1e-15));
}

TEST_CASE("graded mesh") {
  const Weight w(SymmetricPower{1.0}, kUnit);
  const Mesh m = build_mesh(w, 8, 2.0);
  const double expected[] = {8.0 / 15, 4.0 / 15, 2.0 / 15, 1.0 / 15};
  for (int k = 0; k < 4; ++k) {
    CHECK(m.h[k] == doctest::Approx(expected[k]).epsilon(1e-14));
    CHECK(m.h[7 - k] == doctest::Approx(expected[k]).epsilon(1e-14));
  }
  CHECK(m.h.sum() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m.nodes[m.j1] == 1.0);
  CHECK(m.a_node[m.j1] == 0.0);
  CHECK(m.a_mid.minCoeff() > 0.0);
}

TEST_CASE("mesh on an asymmetric domain") {
  const Weight w(SymmetricPower{0.5}, DomainSpec{0.5, 2.0, 0.5, 2.0});
  const Mesh m = build_mesh(w, 12, 1.0);
  CHECK(m.j1 == 4);
  CHECK(m.nodes[m.j1] == 1.0);
  CHECK(m.h.sum() == doctest::Approx(1.5));

  const Weight w2(SymmetricPower{0.5}, DomainSpec{0.3, 2.0, 0.3, 2.0});
  const Mesh m2 = build_mesh(w2, 10, 1.0);
  CHECK(m2.j1 == 5);
  CHECK(m2.nodes[5] == 1.0);
  CHECK(m2.h[0] == doctest::Approx(0.7 / 5));
  CHECK(m2.h[9] == doctest::Approx(1.0 / 5));
}

TEST_CASE("mesh preconditions") {
  const Weight w(SymmetricPower{1.0}, kUnit);
  CHECK_THROWS_AS(build_mesh(w, 9, 1.0), Error);
  CHECK_THROWS_AS(build_mesh(w, 6, 1.0), Error);
  CHECK_THROWS_AS(build_mesh(w, 8, 0.9), Error);
  try {
    build_mesh(w, 11, 1.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Precondition);
    CHECK(std::string(e.what()).find("x = 1") != std::string::npos);
  }
}

TEST_CASE("mesh dump") {
  const Weight w(SymmetricPower{1.0}, kUnit);
  std::ostringstream os;
  write_mesh(os, build_mesh(w, 8, 1.0));
  std::istringstream is(os.str());
  double x = 0, a = 0;
  int rows = 0;
  while (is >> x >> a) ++rows;
  CHECK(rows == 9);
}

TEST_CASE("stiffness on simple profiles") {
  const Weight unit(Uniform{}, kUnit);
  const Mesh m = build_mesh(unit, 16, 1.0);
  const auto ops = make_operators(m);

  SUBCASE("linear profile") {
    const VectorXd ay = apply_stiffness(ops, sample(m, [](double x) { return 3.0 * x - 1.0; }));
    CHECK(ay.cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("quadratic profile") {
    const VectorXd ay = apply_stiffness(ops, sample(m, [](double x) { return x * x; }));
    CHECK(ay[0] == 0.0);
    CHECK(ay[16] == 0.0);
    for (Index i = 1; i < 16; ++i) CHECK(ay[i] == doctest::Approx(-2.0).epsilon(1e-10));
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_AS(apply_stiffness(ops, VectorXd::Zero(5)), Error);
    CHECK_THROWS_AS(discrete_energy(ops, VectorXd::Zero(17), VectorXd::Zero(3)), Error);
  }
  SUBCASE("degenerate weight with data right of 1") {
    const Weight w(SymmetricPower{1.0}, kUnit);
    const Mesh md = build_mesh(w, 8, 1.0);
    const auto od = make_operators(md);
    VectorXd y = VectorXd::Zero(9);
    y[5] = 1.0;
    y[6] = 0.5;
    const VectorXd ay = apply_stiffness(od, y);
    for (Index i = 0; i < md.j1; ++i) CHECK(ay[i] == 0.0);
    // Node j1 only sees the cell (1, 1.25) with a_mid = 0.125.
    CHECK(ay[md.j1] == doctest::Approx(-0.5 / 0.25));
  }
}

TEST_CASE("discrete energy") {
  const Weight unit(Uniform{}, kUnit);
  const Mesh m = build_mesh(unit, 8, 1.0);
  const auto ops = make_operators(m);
  CHECK(discrete_energy(ops, VectorXd::Zero(9), VectorXd::Zero(9)) == 0.0);
  CHECK(discrete_energy(ops, VectorXd::Zero(9), VectorXd::Ones(9)) == doctest::Approx(1.0));

  const Weight w(SymmetricPower{1.0}, kUnit);
  for (int N : {8, 64, 512}) {
    const Mesh md = build_mesh(w, N, 1.0);
    const auto od = make_operators(md);
    const VectorXd y = md.nodes;
    CHECK(discrete_energy(od, y, VectorXd::Zero(N + 1)) == doctest::Approx(0.5).epsilon(1e-12));
  }
  // Graded meshes approach 1/2 as well.
  double prev = 1.0;
  for (int N : {32, 128, 512}) {
    const Mesh md = build_mesh(w, N, 1.02);
    const auto od = make_operators(md);
    const double err = std::abs(discrete_energy(od, md.nodes, VectorXd::Zero(N + 1)) - 0.5);
    CHECK(err <= prev);
    prev = err;
  }
}

TEST_CASE("boundary flux") {
  const Weight w(SymmetricPower{0.5}, kUnit);
  SUBCASE("polynomials on a graded mesh") {
    const Mesh m = build_mesh(w, 16, 1.2);
    const auto f1 = boundary_flux(m, sample(m, [](double x) { return x; }));
    CHECK(f1.c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(f1.d == doctest::Approx(1.0).epsilon(1e-12));
    const auto f2 = boundary_flux(m, sample(m, [](double x) { return x * x; }));
    CHECK(f2.c == doctest::Approx(0.0).scale(1.0).epsilon(1e-11));
    CHECK(f2.d == doctest::Approx(4.0).epsilon(1e-12));
  }
  SUBCASE("second-order accuracy") {
    auto err = [&](int N) {
      const Mesh m = build_mesh(w, N, 1.0);
      const auto f = boundary_flux(m, sample(m, [](double x) { return std::sin(std::numbers::pi * x / 2); }));
      const double exact_c = std::numbers::pi / 2;
      const double exact_d = std::numbers::pi / 2 * std::cos(std::numbers::pi);
      return std::max(std::abs(f.c - exact_c), std::abs(f.d - exact_d));
    };
    const double e256 = err(256);
    const double e128 = err(128);
    CHECK(e256 < 2e-4);
    CHECK(e128 / e256 == doctest::Approx(4.0).epsilon(0.05));
  }
  SUBCASE("conservative flux on a linear profile") {
    const Mesh m = build_mesh(w, 16, 1.0);
    const auto ops = make_operators(m);
    const auto f = conservative_flux(ops, sample(m, [](double x) { return 2.0 * x; }));
    CHECK(f.c == doctest::Approx(2.0 * m.a_mid[0]));
    CHECK(f.d == doctest::Approx(2.0 * m.a_mid[15]));
  }
}

TEST_CASE("stiffness is symmetric and nonnegative") {
  std::mt19937_64 rng(11);
  for (const WeightSpec& spec : {WeightSpec{SymmetricPower{0.5}}, WeightSpec{SymmetricPower{1.5}},
                                 WeightSpec{TwoSidedPower{0.3, 0.9}}}) {
    const Weight w(spec, kUnit);
    const Mesh m = build_mesh(w, 128, 1.05);
    const auto ops = make_operators(m);
    for (int k = 0; k < 5; ++k) {
      const VectorXd y = random_interior(m.size(), rng);
      const VectorXd z = random_interior(m.size(), rng);
      const double yz = mass_dot(ops, apply_stiffness(ops, y), z);
      const double zy = mass_dot(ops, y, apply_stiffness(ops, z));
      CHECK(std::abs(yz - zy) <= 1e-12 * std::max(std::abs(yz), 1.0));
      CHECK(yz == doctest::Approx(stiffness_form(ops, y, z)).epsilon(1e-12));
      CHECK(mass_dot(ops, apply_stiffness(ops, y), y) >= 0.0);
    }
  }
}

TEST_CASE("discrete Friedrichs inequality") {
  for (double p : {0.25, 0.5, 1.0, 1.5}) {
    const Weight w(SymmetricPower{p}, kUnit);
    const auto rep = analyze(w);
    const Mesh m = build_mesh(w, 512, 1.0);
    const auto ops = make_operators(m);
    const Index n = m.size() - 2;
    // Smallest generalised eigenvalue of K v = lambda M v on the interior.
    Eigen::MatrixXd K = Eigen::MatrixXd(ops.interior);
    Eigen::VectorXd mi = ops.mass.segment(1, n).cwiseSqrt().cwiseInverse();
    Eigen::MatrixXd S = mi.asDiagonal() * K * mi.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double lambda_min = es.eigenvalues()[0];
    CHECK(1.0 / lambda_min <= 1.1 * rep.poincare * rep.poincare);
  }
}

TEST_CASE("coupling across the singular node") {
  SUBCASE("vanishes under refinement in the strong regime") {
    const Weight w(SymmetricPower{1.5}, kUnit);
    double prev = 1e300;
    for (int N : {64, 256, 1024}) {
      const Mesh m = build_mesh(w, N, 1.0);
      const auto ops = make_operators(m);
      const double g = ops.conductance[m.j1];
      CHECK(g < prev);
      prev = g;
    }
    CHECK(prev < 0.05);
  }
  SUBCASE("grows in the weak regime") {
    const Weight w(SymmetricPower{0.5}, kUnit);
    const auto g64 = make_operators(build_mesh(w, 64, 1.0)).conductance[32];
    const auto g1024 = make_operators(build_mesh(w, 1024, 1.0)).conductance[512];
    CHECK(g1024 > g64);
  }
}
