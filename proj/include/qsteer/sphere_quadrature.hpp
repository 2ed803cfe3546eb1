#pragma once

// Quadrature over the unit sphere: Gauss-Legendre in the polar angle on the
// panels [0, pi/2] and [pi/2, pi] (kinks of |D x| integrands for singular D
// fall on panel edges or poles) times a uniform trapezoid rule in azimuth.

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "qsteer/bloch.hpp"
#include "qsteer/errors.hpp"

namespace qsteer {

inline constexpr int kDefaultOrder = 96;

struct SphereRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;  // sum to 4pi
  int order = 0;
};

namespace detail {

// Gauss-Legendre nodes/weights on [-1, 1] via the Golub-Welsch eigenproblem.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double b = k / std::sqrt(4.0 * k * k - 1.0);
    jacobi(k - 1, k) = b;
    jacobi(k, k - 1) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    x[i] = es.eigenvalues()(i);
    const double first = es.eigenvectors()(0, i);
    w[i] = 2.0 * first * first;
  }
}

}  // namespace detail

inline SphereRule build_sphere_rule(int order) {
  if (order < 8) throw invalid_input("build_sphere_rule: order must be >= 8");
  const double pi = std::numbers::pi;

  const int n_upper = order - order / 2;
  const int n_lower = order / 2;
  std::vector<double> theta, wtheta;
  theta.reserve(order);
  wtheta.reserve(order);
  const double panels[2][2] = {{0.0, pi / 2}, {pi / 2, pi}};
  const int counts[2] = {n_upper, n_lower};
  std::vector<double> x, w;
  for (int p = 0; p < 2; ++p) {
    detail::gauss_legendre(counts[p], x, w);
    const double mid = 0.5 * (panels[p][0] + panels[p][1]);
    const double half = 0.5 * (panels[p][1] - panels[p][0]);
    for (int i = 0; i < counts[p]; ++i) {
      const double th = mid + half * x[i];
      theta.push_back(th);
      wtheta.push_back(half * w[i] * std::sin(th));
    }
  }

  const int m = 2 * order;
  const double wphi = 2.0 * pi / m;
  SphereRule rule;
  rule.order = order;
  rule.nodes.reserve(static_cast<std::size_t>(order) * m);
  rule.weights.reserve(static_cast<std::size_t>(order) * m);
  for (int i = 0; i < order; ++i) {
    const double st = std::sin(theta[i]), ct = std::cos(theta[i]);
    for (int j = 0; j < m; ++j) {
      const double phi = wphi * j;
      rule.nodes.emplace_back(st * std::cos(phi), st * std::sin(phi), ct);
      rule.weights.push_back(wtheta[i] * wphi);
    }
  }
  return rule;
}

template <typename F>
double integrate_sphere(const SphereRule& rule, F&& f) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double v = f(rule.nodes[i]);
    if (!std::isfinite(v))
      throw nonfinite_integrand("integrate_sphere: integrand is not finite at a node");
    acc += rule.weights[i] * v;
  }
  return acc;
}

// g(D) = (1/2pi) II sqrt(x^T D^2 x) d2x = (1/2pi) II ||D x|| for symmetric D.
// Positively homogeneous: g(sD) = s g(D) for s >= 0.
inline double mean_norm(const SphereRule& rule, const Mat3& d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc += rule.weights[i] * (d * rule.nodes[i]).norm();
  return acc / (2.0 * std::numbers::pi);
}

// Diagonal-D fast path used by the boundary optimizers.
inline double mean_norm(const SphereRule& rule, const Vec3& diag) {
  const double d0 = diag[0] * diag[0], d1 = diag[1] * diag[1], d2 = diag[2] * diag[2];
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const Vec3& x = rule.nodes[i];
    acc += rule.weights[i] *
           std::sqrt(d0 * x[0] * x[0] + d1 * x[1] * x[1] + d2 * x[2] * x[2]);
  }
  return acc / (2.0 * std::numbers::pi);
}

}  // namespace qsteer
