#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "aes/integrator.hpp"

using namespace aes::integrator;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Vector vec(double q, double p) {
  Vector x(2);
  x << q, p;
  return x;
}

// Composite Simpson on [0,1] with n (even) panels.
template <class F>
double simpson01(F f, int n = 2000) {
  const double h = 1.0 / n;
  double s = f(0.0) + f(1.0);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(i * h);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("two-point Gauss nodes and weights", "[quadrature]") {
  const auto rule = QuadratureRule::gauss(2);
  REQUIRE(rule.size() == 2);
  CHECK_THAT(rule.nodes[0], WithinAbs(0.21132486540518713, 1e-12));
  CHECK_THAT(rule.nodes[1], WithinAbs(0.7886751345948128, 1e-12));
  CHECK_THAT(rule.weights[0], WithinAbs(0.5, 1e-12));
  CHECK_THAT(rule.weights[1], WithinAbs(0.5, 1e-12));
  CHECK_THAT(rule.integrate([](double t) { return t * t * t; }), WithinAbs(0.25, 1e-12));
  CHECK(QuadratureRule::gauss(1).nodes[0] == 0.5);
}

TEST_CASE("x-point rule is exact to degree 2x - 1", "[quadrature][property]") {
  for (std::size_t x = 1; x <= 8; ++x) {
    const auto rule = QuadratureRule::gauss(x);
    for (std::size_t m = 0; m <= 2 * x - 1; ++m) {
      INFO("x = " << x << ", m = " << m);
      CHECK_THAT(rule.integrate([m](double t) { return std::pow(t, double(m)); }),
                 WithinAbs(1.0 / double(m + 1), 1e-12));
    }
    // And no further.
    CHECK(std::abs(rule.integrate([x](double t) { return std::pow(t, double(2 * x)); }) - 1.0 / double(2 * x + 1)) >
          1e-13);
  }
}

TEST_CASE("Lagrange basis is cardinal and sums to one", "[basis][property]") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> nodes(1 + t % 5);
    for (double& n : nodes) n = u(rng);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      for (std::size_t j = 0; j < nodes.size(); ++j) {
        CHECK_THAT(lagrange_basis(nodes, i, nodes[j]), WithinAbs(i == j ? 1.0 : 0.0, 1e-9));
      }
    }
    for (int g = 0; g <= 100; ++g) {
      double s = 0.0;
      for (std::size_t i = 0; i < nodes.size(); ++i) s += lagrange_basis(nodes, i, g / 100.0);
      CHECK_THAT(s, WithinAbs(1.0, 1e-9));
    }
  }
}

TEST_CASE("weights equal the integral of each basis polynomial", "[basis]") {
  for (const std::vector<double>& nodes :
       {std::vector<double>{0.1, 0.5, 0.9}, std::vector<double>{0.0, 1.0}, std::vector<double>{0.2, 0.3, 0.6, 0.95}}) {
    const auto w = quadrature_weights(nodes);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      CHECK_THAT(w[i], WithinAbs(simpson01([&](double t) { return lagrange_basis(nodes, i, t); }), 1e-10));
      sum += w[i];
    }
    CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  }
  CHECK_THROWS_AS(quadrature_weights(std::vector{0.3, 0.3}), aes::InvalidArgument);
  CHECK_THROWS_AS(quadrature_weights(std::vector<double>{}), aes::InvalidArgument);
  CHECK_THROWS_AS(gauss_nodes(0), aes::InvalidArgument);
}

TEST_CASE("gradients of the built-in systems match finite differences", "[systems]") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (const auto& sys : {harmonic_oscillator(), pendulum()}) {
    CHECK(sys.is_hamiltonian());
    for (int t = 0; t < 50; ++t) {
      const Vector x = vec(u(rng), u(rng));
      const Vector g = sys.gradient(x);
      for (int d = 0; d < 2; ++d) {
        Vector e = Vector::Zero(2);
        e[d] = 1e-6;
        const double fd = (sys.energy(x + e) - sys.energy(x - e)) / 2e-6;
        CHECK_THAT(g[d], WithinAbs(fd, 1e-7));
      }
    }
  }
}

TEST_CASE("oscillator energy is conserved to round-off over 1e4 steps", "[conservation]") {
  IntegratorConfig cfg;
  cfg.step = 0.1;
  cfg.points = 2;
  cfg.fixed_point_tol = 1e-13;
  const auto traj = integrate(harmonic_oscillator(), vec(1.0, 0.0), cfg, 10000);
  REQUIRE(traj.states.size() == 10001);
  CHECK(traj.max_drift() <= 1e-10);
  for (std::size_t n = 1; n < traj.energies.size(); n += 97) {
    CHECK(std::abs(traj.energies[n] - traj.energies[n - 1]) <= 10 * cfg.fixed_point_tol);
  }
}

TEST_CASE("stepping forward then backward returns to the start", "[conservation]") {
  IntegratorConfig cfg;
  const auto sys = harmonic_oscillator();
  const auto rule = QuadratureRule::gauss(2);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    const Vector x0 = vec(u(rng), u(rng));
    const Vector x1 = step_energy_preserving(sys, rule, x0, 0.1, cfg);
    const Vector back = step_energy_preserving(sys, rule, x1, -0.1, cfg);
    CHECK((back - x0).cwiseAbs().maxCoeff() <= 100 * cfg.fixed_point_tol);
  }
}

TEST_CASE("pendulum drift stays on a plateau", "[conservation]") {
  // The two-point rule is not exact for sin q, so energy wobbles along the
  // orbit; the envelope settles within a few periods and then stops growing.
  IntegratorConfig cfg;
  cfg.step = 0.01;
  cfg.points = 2;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> q(-2.5, 2.5);
  std::uniform_real_distribution<double> p(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const double q0 = q(rng);
    const double p0 = p(rng);
    const auto traj = integrate(pendulum(), vec(q0, p0), cfg, 20000);
    const double e0 = traj.energies.front();
    double first = 0.0;
    double second = 0.0;
    for (std::size_t n = 1; n < traj.energies.size(); ++n) {
      double& half = n <= 10000 ? first : second;
      half = std::max(half, std::abs(traj.energies[n] - e0));
    }
    INFO("start (" << q0 << ", " << p0 << "), envelope " << first << " then " << second);
    CHECK(first <= 1e-10);
    CHECK(second <= 1.5 * std::max(first, 1e-14));
  }
}

TEST_CASE("small pendulum swings keep the drift ratio under 100", "[conservation]") {
  IntegratorConfig cfg;
  cfg.step = 0.01;
  cfg.points = 2;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const double q0 = u(rng);
    const double p0 = 0.5 * u(rng);
    const auto traj = integrate(pendulum(), vec(q0, p0), cfg, 10000);
    const double e0 = traj.energies.front();
    const double d100 = std::abs(traj.energies[100] - e0);
    const double d10000 = std::abs(traj.energies[10000] - e0);
    INFO("start (" << q0 << ", " << p0 << "), drift@100 " << d100 << ", drift@1e4 " << d10000);
    CHECK(d10000 <= 100.0 * std::max(d100, 1e-15));
  }
}

TEST_CASE("zero steps and error paths", "[integrate]") {
  IntegratorConfig cfg;
  const auto traj = integrate(harmonic_oscillator(), vec(0.3, 0.4), cfg, 0);
  REQUIRE(traj.states.size() == 1);
  CHECK(traj.max_drift() == 0.0);

  IntegratorConfig stiff;
  stiff.step = 5.0;
  stiff.max_fixed_point_iters = 10;
  CHECK_THROWS_AS(integrate(harmonic_oscillator(), vec(1.0, 0.0), stiff, 1), aes::ConvergenceError);
  try {
    (void)integrate(harmonic_oscillator(), vec(1.0, 0.0), stiff, 1);
  } catch (const aes::ConvergenceError& e) {
    CHECK(e.residual() > 0.0);
  }

  IntegratorConfig bad;
  bad.points = 0;
  CHECK_THROWS_AS(integrate(harmonic_oscillator(), vec(1.0, 0.0), bad, 1), aes::InvalidArgument);
  CHECK_THROWS_AS(step_energy_preserving(harmonic_oscillator(), Vector::Zero(3), cfg), aes::InvalidArgument);
}

TEST_CASE("a non-skew structure is reported as not Hamiltonian", "[systems]") {
  auto sys = harmonic_oscillator();
  sys.structure(0, 0) = -0.1;
  CHECK_FALSE(sys.is_hamiltonian());
  CHECK_THAT(sys.skew_defect(), WithinAbs(0.2, 1e-15));
}
