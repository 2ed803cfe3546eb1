#pragma once

// Steerability boundary computations: the T-state boundary integral, the
// Bowles sufficient criterion, the mapped-boundary constrained optimization
// over extremal channels, the displaced-Werner and degenerate-T closed
// forms, and generic ray bisection for physicality/PPT borders.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>

#include "qsteer/bloch.hpp"
#include "qsteer/errors.hpp"
#include "qsteer/sphere_quadrature.hpp"

namespace qsteer {

// Unit direction in (t1, t2, t3) space.
struct RayDirection {
  double alpha = 0.0;  // polar angle in [0, pi]
  double beta = 0.0;   // azimuthal angle in [0, 2pi)

  Vec3 unit() const {
    return Vec3(std::sin(alpha) * std::cos(beta), std::sin(alpha) * std::sin(beta),
                std::cos(alpha));
  }
};

struct MappedBoundarySample {
  double alpha = 0.0;
  double beta = 0.0;
  double a = 0.0;
  double r = 0.0;
  double u_star = 0.0;
  double v_star = 0.0;
  bool converged = true;
};

namespace detail {

struct GoldenResult {
  double x = 0.0;
  double fx = 0.0;
  bool converged = true;
};

template <typename F>
GoldenResult golden_min(F&& f, double lo, double hi, double tol, int max_iter = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double b = hi - inv_phi * (hi - lo);
  double c = lo + inv_phi * (hi - lo);
  double fb = f(b), fc = f(c);
  GoldenResult res;
  int it = 0;
  while (hi - lo > tol && it++ < max_iter) {
    if (fb < fc) {
      hi = c;
      c = b;
      fc = fb;
      b = hi - inv_phi * (hi - lo);
      fb = f(b);
    } else {
      lo = b;
      b = c;
      fb = fc;
      c = lo + inv_phi * (hi - lo);
      fc = f(c);
    }
  }
  res.converged = (hi - lo <= tol);
  res.x = 0.5 * (lo + hi);
  res.fx = f(res.x);
  return res;
}

// Nelder-Mead on functions of (theta, phi); used to refine sphere maxima.
template <typename F>
std::pair<Eigen::Vector2d, double> nelder_mead_2d(F&& f, Eigen::Vector2d start,
                                                  double step = 0.02, int max_iter = 300) {
  std::array<Eigen::Vector2d, 3> xs{start, start + Eigen::Vector2d(step, 0),
                                    start + Eigen::Vector2d(0, step)};
  std::array<double, 3> fs{f(xs[0]), f(xs[1]), f(xs[2])};
  for (int it = 0; it < max_iter; ++it) {
    std::array<int, 3> idx{0, 1, 2};
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fs[i] < fs[j]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    if (std::abs(fs[worst] - fs[best]) < 1e-14 * (1.0 + std::abs(fs[best])) &&
        (xs[worst] - xs[best]).norm() < 1e-10)
      break;
    const Eigen::Vector2d centroid = 0.5 * (xs[best] + xs[mid]);
    const Eigen::Vector2d refl = centroid + (centroid - xs[worst]);
    const double frefl = f(refl);
    if (frefl < fs[best]) {
      const Eigen::Vector2d exp_pt = centroid + 2.0 * (centroid - xs[worst]);
      const double fexp = f(exp_pt);
      if (fexp < frefl) {
        xs[worst] = exp_pt;
        fs[worst] = fexp;
      } else {
        xs[worst] = refl;
        fs[worst] = frefl;
      }
    } else if (frefl < fs[mid]) {
      xs[worst] = refl;
      fs[worst] = frefl;
    } else {
      const Eigen::Vector2d contr = centroid + 0.5 * (xs[worst] - centroid);
      const double fcontr = f(contr);
      if (fcontr < fs[worst]) {
        xs[worst] = contr;
        fs[worst] = fcontr;
      } else {
        xs[mid] = xs[best] + 0.5 * (xs[mid] - xs[best]);
        xs[worst] = xs[best] + 0.5 * (xs[worst] - xs[best]);
        fs[mid] = f(xs[mid]);
        fs[worst] = f(xs[worst]);
      }
    }
  }
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int i, int j) { return fs[i] < fs[j]; });
  return {xs[idx[0]], fs[idx[0]]};
}

inline const SphereRule& bowles_seed_rule() {
  static const SphereRule rule = build_sphere_rule(32);
  return rule;
}

}  // namespace detail

// Radius r such that (a = 0, T = r diag(dir.unit())) lies on the T-state
// non-steerability border: r = 1/g(D) by homogeneity of the mean norm.
inline double tstate_boundary_radius(const RayDirection& dir, const SphereRule& rule) {
  return 1.0 / mean_norm(rule, Vec3(dir.unit()));
}

// max over unit x of (a.x)^2 + 2||T x||; a value <= 1 certifies
// non-steerability. Dense seeding on rule nodes plus Nelder-Mead refinement.
inline double bowles_value(const CanonicalState& s, const SphereRule& seed_rule) {
  const Vec3 a = s.a;
  const Vec3 t = s.t;
  auto f = [&](const Vec3& x) {
    const double ax = a.dot(x);
    return ax * ax + 2.0 * std::sqrt(t[0] * t[0] * x[0] * x[0] + t[1] * t[1] * x[1] * x[1] +
                                     t[2] * t[2] * x[2] * x[2]);
  };

  double best = -std::numeric_limits<double>::infinity();
  Vec3 best_x = Vec3::UnitZ();
  auto consider = [&](const Vec3& x) {
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  };
  for (const Vec3& x : seed_rule.nodes) consider(x);
  for (int i = 0; i < 3; ++i) {
    consider(Vec3::Unit(i));
    consider(-Vec3::Unit(i));
  }
  if (a.norm() > 0) consider(a.normalized());

  const double theta0 = std::acos(std::clamp(best_x[2], -1.0, 1.0));
  const double phi0 = std::atan2(best_x[1], best_x[0]);
  auto neg = [&](const Eigen::Vector2d& p) {
    const Vec3 x(std::sin(p[0]) * std::cos(p[1]), std::sin(p[0]) * std::sin(p[1]),
                 std::cos(p[0]));
    return -f(x);
  };
  const auto [arg, val] = detail::nelder_mead_2d(neg, Eigen::Vector2d(theta0, phi0));
  return std::max(best, -val);
}

inline double bowles_value(const CanonicalState& s) {
  return bowles_value(s, detail::bowles_seed_rule());
}

// Constrained optimization for the mapped boundary: with the constraint
// a = sin u sin v eliminated (v = arcsin(a / sin u)), minimize
// g(diag(d1/cos u, d2/cos v, d3/(cos u cos v))) over u in [arcsin a, pi/2]
// and return r = 1/min. The state (a e_z, r D) is certified non-steerable.
inline MappedBoundarySample mapped_boundary_radius(double a, const RayDirection& dir,
                                                   const SphereRule& rule) {
  if (!(a >= 0.0 && a < 1.0))
    throw invalid_input("mapped_boundary_radius: invalid-bloch-length, need 0 <= a < 1");
  const Vec3 d = dir.unit();
  const double inf = std::numeric_limits<double>::infinity();

  auto v_of = [a](double u) {
    const double su = std::sin(u);
    if (su <= 0.0) return 0.0;  // only reachable when a = 0
    return std::asin(std::clamp(a / su, 0.0, 1.0));
  };
  auto objective = [&](double u) {
    const double v = v_of(u);
    const double lam[3] = {std::cos(u), std::cos(v), std::cos(u) * std::cos(v)};
    Vec3 e;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(lam[i]) < 1e-8) {
        // At the feasibility endpoints a contraction vanishes; the integrand
        // diverges unless the matching direction component is zero.
        if (std::abs(d[i]) > 0.0) return inf;
        e[i] = 0.0;
      } else {
        e[i] = d[i] / lam[i];
      }
    }
    return mean_norm(rule, e);
  };

  const double u_min = std::asin(a);
  const double u_max = std::numbers::pi / 2;
  constexpr int kSeeds = 48;
  int best_i = 0;
  double best_f = inf;
  std::array<double, kSeeds> us{}, fs{};
  for (int i = 0; i < kSeeds; ++i) {
    us[i] = u_min + (u_max - u_min) * i / (kSeeds - 1);
    fs[i] = objective(us[i]);
    if (fs[i] < best_f) {
      best_f = fs[i];
      best_i = i;
    }
  }

  const double lo = us[std::max(best_i - 1, 0)];
  const double hi = us[std::min(best_i + 1, kSeeds - 1)];
  const auto gs = detail::golden_min(objective, lo, hi, 1e-10);

  MappedBoundarySample sample;
  sample.alpha = dir.alpha;
  sample.beta = dir.beta;
  sample.a = a;
  sample.converged = gs.converged;
  double u_star = gs.x, f_star = gs.fx;
  if (best_f < f_star) {
    u_star = us[best_i];
    f_star = best_f;
  }
  sample.u_star = u_star;
  sample.v_star = v_of(u_star);
  sample.r = 1.0 / f_star;
  return sample;
}

// Closed form for the mapped displaced-Werner border (T = -xi I at Bloch
// length a), from the u = v optimum of the boundary integral.
inline double displaced_werner_xi(double a) {
  if (!(a >= 0.0 && a <= 1.0))
    throw invalid_input("displaced_werner_xi: a must lie in [0, 1]");
  if (a == 0.0) return 0.5;
  if (a == 1.0) return 0.0;
  const double bracket = 1.0 / std::sqrt(1.0 - a) +
                         std::sqrt((1.0 - a) / a) * std::asinh(std::sqrt(a / (1.0 - a)));
  return std::sqrt(1.0 - a) / bracket;
}

// Closed form for the degenerate (t1 = t2) boundary as printed, with
// c = 2 cot(alpha)/(1-a) - 1. Kept verbatim as a hypothesis under audit:
// callers compare against the numeric pipeline and report discrepancies.
inline double degenerate_t_radius(double a, double alpha) {
  if (!(a >= 0.0 && a < 1.0))
    throw invalid_input("degenerate_t_radius: a must lie in [0, 1)");
  const double sin_alpha = std::sin(alpha);
  const double tan_alpha = std::tan(alpha);
  const double c = (tan_alpha == 0.0)
                       ? std::numeric_limits<double>::infinity()
                       : 2.0 / tan_alpha / (1.0 - a) - 1.0;
  if (sin_alpha <= 0.0)
    throw branch_domain_error(a, alpha, c, "degenerate_t_radius: sin(alpha) <= 0");
  if (1.0 + c < 0.0)
    throw branch_domain_error(a, alpha, c,
                              "degenerate_t_radius: 1 + c < 0, branch expressions not real");
  const double pre = std::sqrt(2.0 * (1.0 - a)) / sin_alpha;
  double bracket;
  if (std::abs(c) < 1e-12) {
    bracket = std::sqrt(1.0 + c) + 1.0;  // both branches share this limit
  } else if (c < 0.0) {
    const double s = std::sqrt(-c);
    bracket = std::sqrt(1.0 + c) + std::asin(s) / s;
  } else {
    const double s = std::sqrt(c), q = std::sqrt(1.0 + c);
    bracket = q + 0.5 * std::log((q + s) / (q - s)) / s;
  }
  return pre / bracket;
}

// Side-by-side audit of the printed degenerate-T formula against the
// numeric boundary pipeline (with an order-doubled self-consistency value).
struct DegenerateTAudit {
  double a = 0.0;
  double alpha = 0.0;
  double c = 0.0;
  bool printed_valid = false;
  double printed_r = std::numeric_limits<double>::quiet_NaN();
  std::string branch_error;
  double reference_r = 0.0;
  double reference_refined = 0.0;
  double discrepancy = std::numeric_limits<double>::quiet_NaN();
  double u_star = 0.0;
  double v_star = 0.0;
  bool converged = true;
};

inline DegenerateTAudit audit_degenerate_t(double a, double alpha, const SphereRule& rule,
                                           const SphereRule& fine,
                                           double beta = std::numbers::pi / 4) {
  DegenerateTAudit audit;
  audit.a = a;
  audit.alpha = alpha;
  const RayDirection dir{alpha, beta};

  const auto sample = mapped_boundary_radius(a, dir, rule);
  const auto refined = mapped_boundary_radius(a, dir, fine);
  audit.reference_r = sample.r;
  audit.reference_refined = refined.r;
  audit.u_star = sample.u_star;
  audit.v_star = sample.v_star;
  audit.converged = sample.converged && refined.converged;

  try {
    audit.printed_r = degenerate_t_radius(a, alpha);
    audit.printed_valid = true;
    audit.c = 2.0 / std::tan(alpha) / (1.0 - a) - 1.0;
    audit.discrepancy = std::abs(audit.printed_r - audit.reference_r);
  } catch (const branch_domain_error& e) {
    audit.printed_valid = false;
    audit.c = e.c;
    audit.branch_error = e.what();
  }
  return audit;
}

inline DegenerateTAudit audit_degenerate_t(double a, double alpha, int order = kDefaultOrder,
                                           double beta = std::numbers::pi / 4) {
  return audit_degenerate_t(a, alpha, build_sphere_rule(order), build_sphere_rule(2 * order),
                            beta);
}

// Bisection for the flip radius of a monotone predicate along the ray
// (a fixed, t = r diag(dir.unit())). The predicate must hold at r = 0.
inline double boundary_radius_along_ray(const std::function<bool(const CanonicalState&)>& pred,
                                        const Vec3& a, const RayDirection& dir, double r_max,
                                        double tol) {
  const Vec3 d = dir.unit();
  auto state_at = [&](double r) { return CanonicalState{a, r * d}; };

  if (!pred(state_at(0.0)))
    throw invalid_input("boundary_radius_along_ray: invalid-ray, predicate false at r = 0");

  constexpr int kScan = 64;
  int flips = 0;
  double lo = 0.0, hi = r_max;
  bool prev = true;
  for (int i = 1; i <= kScan; ++i) {
    const double r = r_max * i / kScan;
    const bool cur = pred(state_at(r));
    if (cur != prev) {
      ++flips;
      if (flips == 1) {
        lo = r_max * (i - 1) / kScan;
        hi = r;
      }
      prev = cur;
    }
  }
  if (flips > 1)
    throw non_monotone_predicate(
        "boundary_radius_along_ray: predicate changed sign more than once on coarse scan");
  if (flips == 0) return r_max;

  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (pred(state_at(mid)))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

inline double boundary_radius_along_ray(const std::function<bool(const CanonicalState&)>& pred,
                                        double a, const RayDirection& dir, double r_max,
                                        double tol) {
  return boundary_radius_along_ray(pred, Vec3(0, 0, a), dir, r_max, tol);
}

}  // namespace qsteer
