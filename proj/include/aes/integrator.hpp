#pragma once

// Energy-preserving time integration built from an x-point quadrature rule.
// The step solves
//
//   x1 = x0 + h * A * sum_i a_i * gradS((1 - N_i) x0 + N_i x1)
//
// i.e. the gradient averaged along the segment x0 -> x1 with quadrature
// weights a_i taken from the Lagrange basis on the nodes N_i. For constant
// skew-symmetric A and a rule exact for the integrand, S(x1) == S(x0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <sstream>
#include <vector>

#include "aes/error.hpp"

namespace aes::integrator {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

inline void require_distinct(std::span<const double> nodes) {
  aes::detail::require(!nodes.empty(), "quadrature: node list is empty");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      if (nodes[i] == nodes[j]) throw InvalidArgument("quadrature: duplicate nodes");
    }
  }
}

// Coefficients (ascending powers) of prod_{j != i} (tau - N_j) / (N_i - N_j).
inline std::vector<double> basis_coefficients(std::span<const double> nodes, std::size_t i) {
  std::vector<double> c{1.0};
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j == i) continue;
    const double denom = nodes[i] - nodes[j];
    std::vector<double> next(c.size() + 1, 0.0);
    for (std::size_t m = 0; m < c.size(); ++m) {
      next[m + 1] += c[m] / denom;
      next[m] -= c[m] * nodes[j] / denom;
    }
    c = std::move(next);
  }
  return c;
}

}  // namespace detail

inline double lagrange_basis(std::span<const double> nodes, std::size_t i, double tau) {
  detail::require_distinct(nodes);
  aes::detail::require(i < nodes.size(), "lagrange_basis: index out of range");
  double v = 1.0;
  for (std::size_t j = 0; j < nodes.size(); ++j) {
    if (j != i) v *= (tau - nodes[j]) / (nodes[i] - nodes[j]);
  }
  return v;
}

// a_i = integral_0^1 l_i(tau) dtau, by exact integration of the expanded basis.
inline std::vector<double> quadrature_weights(std::span<const double> nodes) {
  detail::require_distinct(nodes);
  std::vector<double> w(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto c = detail::basis_coefficients(nodes, i);
    double s = 0.0;
    for (std::size_t m = 0; m < c.size(); ++m) s += c[m] / static_cast<double>(m + 1);
    w[i] = s;
  }
  return w;
}

// Roots of the degree-x Legendre polynomial mapped to [0,1], ascending.
inline std::vector<double> gauss_nodes(std::size_t x) {
  aes::detail::require(x >= 1, "gauss_nodes: need at least one point");
  std::vector<double> nodes(x);
  const double n = static_cast<double>(x);
  for (std::size_t i = 0; i < x; ++i) {
    double t = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = t;
      for (std::size_t k = 2; k <= x; ++k) {
        const double kk = static_cast<double>(k);
        const double p2 = ((2.0 * kk - 1.0) * t * p1 - (kk - 1.0) * p0) / kk;
        p0 = p1;
        p1 = p2;
      }
      // P_x'(t) = x (t P_x - P_{x-1}) / (t^2 - 1)
      const double dp = n * (t * p1 - p0) / (t * t - 1.0);
      const double dt = p1 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    nodes[i] = 0.5 * (1.0 + t);
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  static QuadratureRule from_nodes(std::vector<double> nodes) {
    auto w = quadrature_weights(nodes);
    return {std::move(nodes), std::move(w)};
  }
  static QuadratureRule gauss(std::size_t x) { return from_nodes(gauss_nodes(x)); }

  std::size_t size() const noexcept { return nodes.size(); }

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

/// dx/dt = A * gradS(x) with a constant structure matrix A.
struct GradientFlowSystem {
  Matrix structure;
  std::function<double(const Vector&)> energy;
  std::function<Vector(const Vector&)> gradient;

  std::size_t dimension() const noexcept { return static_cast<std::size_t>(structure.rows()); }

  double skew_defect() const { return (structure + structure.transpose()).cwiseAbs().maxCoeff(); }
  bool is_hamiltonian(double tol = 1e-12) const { return skew_defect() <= tol; }
};

// S = (q^2 + p^2) / 2 with the canonical symplectic structure.
inline GradientFlowSystem harmonic_oscillator() {
  Matrix a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  return {a, [](const Vector& x) { return 0.5 * x.squaredNorm(); },
          [](const Vector& x) -> Vector { return x; }};
}

// S = p^2 / 2 - cos q
inline GradientFlowSystem pendulum() {
  Matrix a(2, 2);
  a << 0.0, 1.0, -1.0, 0.0;
  return {a, [](const Vector& x) { return 0.5 * x[1] * x[1] - std::cos(x[0]); },
          [](const Vector& x) -> Vector {
            Vector g(2);
            g << std::sin(x[0]), x[1];
            return g;
          }};
}

struct IntegratorConfig {
  double step = 0.1;
  std::size_t points = 2;
  double fixed_point_tol = 1e-13;
  int max_fixed_point_iters = 100;

  void validate() const {
    aes::detail::require(std::isfinite(step), "integrator: step must be finite");
    aes::detail::require(points >= 1, "integrator: need at least one quadrature point");
    aes::detail::require(fixed_point_tol > 0.0, "integrator: fixed-point tolerance must be positive");
    aes::detail::require(max_fixed_point_iters > 0, "integrator: iteration budget must be positive");
  }
};

inline Vector step_energy_preserving(const GradientFlowSystem& sys, const QuadratureRule& rule,
                                     const Vector& x0, double h, const IntegratorConfig& cfg) {
  aes::detail::require(static_cast<std::size_t>(x0.size()) == sys.dimension(),
                       "step: state dimension does not match the system");
  Vector x1 = x0;
  double residual = INFINITY;
  for (int it = 0; it < cfg.max_fixed_point_iters; ++it) {
    Vector g = Vector::Zero(x0.size());
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const double c = rule.nodes[i];
      g += rule.weights[i] * sys.gradient((1.0 - c) * x0 + c * x1);
    }
    Vector next = x0 + h * (sys.structure * g);
    residual = (next - x1).cwiseAbs().maxCoeff();
    x1 = std::move(next);
    if (residual <= cfg.fixed_point_tol) return x1;
  }
  std::ostringstream os;
  os << "fixed-point iteration did not converge in " << cfg.max_fixed_point_iters
     << " iterations (residual " << residual << ")";
  throw ConvergenceError(os.str(), residual);
}

inline Vector step_energy_preserving(const GradientFlowSystem& sys, const Vector& x0,
                                     const IntegratorConfig& cfg) {
  cfg.validate();
  return step_energy_preserving(sys, QuadratureRule::gauss(cfg.points), x0, cfg.step, cfg);
}

struct Trajectory {
  std::vector<Vector> states;
  std::vector<double> energies;

  double max_drift() const {
    double d = 0.0;
    for (double e : energies) d = std::max(d, std::abs(e - energies.front()));
    return d;
  }
};

inline Trajectory integrate(const GradientFlowSystem& sys, const Vector& x0,
                            const IntegratorConfig& cfg, std::size_t steps) {
  cfg.validate();
  const auto rule = QuadratureRule::gauss(cfg.points);
  Trajectory traj;
  traj.states.reserve(steps + 1);
  traj.energies.reserve(steps + 1);
  traj.states.push_back(x0);
  traj.energies.push_back(sys.energy(x0));
  for (std::size_t n = 0; n < steps; ++n) {
    traj.states.push_back(step_energy_preserving(sys, rule, traj.states.back(), cfg.step, cfg));
    traj.energies.push_back(sys.energy(traj.states.back()));
  }
  return traj;
}

}  // namespace aes::integrator
