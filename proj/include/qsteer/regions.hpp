#pragma once

// Region classification of canonical states, convex-hull closure of the
// certified non-steerable sets, and generation of figure slice tables.

#include <algorithm>
#include <cmath>
#include <ctime>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qsteer/bloch.hpp"
#include "qsteer/boundaries.hpp"
#include "qsteer/errors.hpp"
#include "qsteer/sphere_quadrature.hpp"
#include "qsteer/version.hpp"

namespace qsteer {

using Vec2 = Eigen::Vector2d;

// Labels are mutually exclusive; the first matching certificate wins.
enum class RegionLabel {
  nonphysical,
  separable,
  nonsteerable_bowles,
  nonsteerable_mapped,
  nonsteerable_hull,
  entangled_unknown,
};

inline std::string_view to_string(RegionLabel l) {
  switch (l) {
    case RegionLabel::nonphysical: return "nonphysical";
    case RegionLabel::separable: return "separable";
    case RegionLabel::nonsteerable_bowles: return "nonsteerable_bowles";
    case RegionLabel::nonsteerable_mapped: return "nonsteerable_mapped";
    case RegionLabel::nonsteerable_hull: return "nonsteerable_hull";
    case RegionLabel::entangled_unknown: return "entangled_unknown";
  }
  return "entangled_unknown";
}

inline std::optional<RegionLabel> region_label_from_string(std::string_view s) {
  for (RegionLabel l :
       {RegionLabel::nonphysical, RegionLabel::separable, RegionLabel::nonsteerable_bowles,
        RegionLabel::nonsteerable_mapped, RegionLabel::nonsteerable_hull,
        RegionLabel::entangled_unknown})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

struct SliceSpec {
  enum class Figure { fig2, fig3a, fig3b, custom };

  Figure figure = Figure::custom;
  double a = 0.0;       // Alice Bloch length along e_z (ignored for fig2 sweeps)
  double ratio = 1.0;   // t2'/t1' for meridian slices
  int resolution = 256;
  int order = kDefaultOrder;
  double tol = kDefaultTol;
  double r_max = std::sqrt(3.0) + 0.2;  // bisection range, covers the state tetrahedron
};

inline SliceSpec fig2_spec() {
  SliceSpec s;
  s.figure = SliceSpec::Figure::fig2;
  return s;
}

inline SliceSpec fig3a_spec() {
  SliceSpec s;
  s.figure = SliceSpec::Figure::fig3a;
  s.a = 0.1;
  s.ratio = 1.0;
  return s;
}

inline SliceSpec fig3b_spec() {
  SliceSpec s;
  s.figure = SliceSpec::Figure::fig3b;
  s.a = 0.2;
  s.ratio = 0.5;
  return s;
}

// Meridian slice azimuth: both t1' and t2' negative with t2' = ratio * t1'.
inline double slice_beta(const SliceSpec& spec) {
  return std::numbers::pi + std::atan(spec.ratio);
}

struct SliceRow {
  double ray = 0.0;  // a for fig2, alpha for meridian slices
  double w = 0.0;    // slice-plane coordinates of the mapped-border point
  double z = 0.0;
  double r_physical = 0.0;
  double r_ppt = 0.0;
  double r_bowles = 0.0;
  double r_mapped = 0.0;
  double r_hull = 0.0;
  double u_star = 0.0;
  double v_star = 0.0;
  bool converged = true;
  RegionLabel label = RegionLabel::entangled_unknown;
};

struct SliceMetadata {
  std::string figure;
  double a = 0.0;
  double ratio = 1.0;
  double beta = 0.0;
  int resolution = 0;
  int order = 0;
  double tol = 0.0;
  double convergence_g = 0.0;          // mean norm of a representative direction
  double convergence_g_refined = 0.0;  // same at doubled order
  std::string version{kVersion};
  std::string generated_at;  // excluded from determinism checks
};

struct SliceTable {
  SliceMetadata meta;
  std::vector<SliceRow> rows;
};

struct Polygon {
  std::vector<Vec2> vertices;  // counterclockwise, strictly convex
};

namespace detail {

inline double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

}  // namespace detail

// Andrew's monotone chain; returns the hull in counterclockwise order with
// collinear points dropped.
inline std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& p, const Vec2& q) {
    return p.x() < q.x() || (p.x() == q.x() && p.y() < q.y());
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& p, const Vec2& q) { return p == q; }),
            pts.end());
  if (pts.size() < 3)
    throw degenerate_hull(pts.size() == 2, "convex_hull_2d: need at least 3 distinct points");

  std::vector<Vec2> hull(2 * pts.size());
  std::size_t k = 0;
  for (const Vec2& p : pts) {  // lower chain
    while (k >= 2 && detail::cross2(hull[k - 2], hull[k - 1], p) <= 0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {  // upper chain
    while (k >= lower && detail::cross2(hull[k - 2], hull[k - 1], *it) <= 0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  if (hull.size() < 3) throw degenerate_hull(true, "convex_hull_2d: all points collinear");
  return hull;
}

inline bool polygon_contains(const Polygon& poly, const Vec2& pt, double eps = 1e-12) {
  const auto& v = poly.vertices;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2& q = v[(i + 1) % v.size()];
    if (detail::cross2(p, q, pt) < -eps * (q - p).norm()) return false;
  }
  return true;
}

// Distance from the origin (assumed inside) to the polygon boundary along
// the unit direction `u`.
inline double polygon_ray_exit(const Polygon& poly, const Vec2& u) {
  const auto& v = poly.vertices;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& p = v[i];
    const Vec2 e = v[(i + 1) % v.size()] - p;
    const double denom = u.x() * e.y() - u.y() * e.x();
    if (std::abs(denom) < 1e-15) continue;
    const double s = (p.x() * e.y() - p.y() * e.x()) / denom;
    if (s <= 0) continue;
    const double tau = (e.squaredNorm() > 0)
                           ? (s * u - p).dot(e) / e.squaredNorm()
                           : -1.0;
    if (tau < -1e-12 || tau > 1.0 + 1e-12) continue;
    best = std::min(best, s);
  }
  return best;
}

namespace detail {

inline bool physical_pred(const CanonicalState& s, double tol) {
  return is_physical(s.to_bloch(), tol);
}

inline bool separable_pred(const CanonicalState& s, double tol) {
  const BlochState b = s.to_bloch();
  const Mat4c rho = density_matrix(b);
  return min_eigenvalue(rho) >= -tol && min_eigenvalue(partial_transpose_b(rho)) >= -tol;
}

inline bool bowles_pred(const CanonicalState& s, double tol) {
  return bowles_value(s) <= 1.0 + tol;
}

// t-space direction for an in-plane sweep angle psi in [0, 2pi), mapped to
// the RayDirection convention (alpha in [0, pi]).
inline RayDirection sweep_direction(double psi, double beta) {
  const double two_pi = 2.0 * std::numbers::pi;
  psi = std::fmod(psi, two_pi);
  if (psi < 0) psi += two_pi;
  if (psi <= std::numbers::pi) return RayDirection{psi, beta};
  return RayDirection{two_pi - psi, beta + std::numbers::pi};
}

struct BorderSweep {
  std::vector<double> psi;
  std::vector<double> r_mapped;
  std::vector<double> r_bowles;
  std::vector<double> r_ppt;
};

// Border radii over a full-plane sweep. Mapped and Bowles radii depend only
// on per-axis magnitudes, so they are computed on a quarter sweep and
// mirrored; the PPT border is sign-dependent and computed on every ray.
inline BorderSweep sweep_borders(double a, double beta, int n_psi, const SphereRule& rule,
                                 double tol, double r_max) {
  BorderSweep sw;
  sw.psi.resize(n_psi);
  sw.r_mapped.resize(n_psi);
  sw.r_bowles.resize(n_psi);
  sw.r_ppt.resize(n_psi);

  const int quarter = n_psi / 4;
  std::vector<double> rm(quarter + 1), rb(quarter + 1);
  for (int j = 0; j <= quarter; ++j) {
    const double psi = 0.5 * std::numbers::pi * j / quarter;
    const RayDirection dir = sweep_direction(psi, beta);
    rm[j] = mapped_boundary_radius(a, dir, rule).r;
    rb[j] = boundary_radius_along_ray(
        [&](const CanonicalState& s) { return bowles_pred(s, tol); }, a, dir, r_max, 1e-10);
  }
  for (int j = 0; j < n_psi; ++j) {
    sw.psi[j] = 2.0 * std::numbers::pi * j / n_psi;
    int jq = j <= n_psi / 2 ? j : n_psi - j;
    if (jq > quarter) jq = n_psi / 2 - jq;
    sw.r_mapped[j] = rm[jq];
    sw.r_bowles[j] = rb[jq];
    const RayDirection dir = sweep_direction(sw.psi[j], beta);
    sw.r_ppt[j] = boundary_radius_along_ray(
        [&](const CanonicalState& s) { return separable_pred(s, tol); }, a, dir, r_max, 1e-10);
  }
  return sw;
}

inline Polygon hull_from_sweep(const BorderSweep& sw, const std::vector<Vec2>& extra) {
  std::vector<Vec2> pts;
  pts.reserve(3 * sw.psi.size() + extra.size());
  for (std::size_t j = 0; j < sw.psi.size(); ++j) {
    const Vec2 u(std::sin(sw.psi[j]), std::cos(sw.psi[j]));
    pts.push_back(sw.r_mapped[j] * u);
    pts.push_back(sw.r_bowles[j] * u);
    pts.push_back(sw.r_ppt[j] * u);
  }
  pts.insert(pts.end(), extra.begin(), extra.end());
  return Polygon{convex_hull_2d(std::move(pts))};
}

}  // namespace detail

// Convex hull of the mapped, Bowles and separable border samples in the
// meridian slice plane (w, z) with t1 = w cos(beta), t2 = w sin(beta),
// t3 = z. Every vertex is a certified non-steerable state, so hull
// membership is itself a certificate.
inline Polygon hull_region(double a, const SliceSpec& spec) {
  if (!(a >= 0.0 && a < 1.0)) throw invalid_input("hull_region: a must lie in [0, 1)");
  if (spec.resolution < 16) throw invalid_input("hull_region: resolution must be >= 16");
  const SphereRule rule = build_sphere_rule(spec.order);
  const int n_psi = 4 * spec.resolution;
  const auto sweep =
      detail::sweep_borders(a, slice_beta(spec), n_psi, rule, spec.tol, spec.r_max);
  return detail::hull_from_sweep(sweep, {});
}

struct ClassifyConfig {
  double tol = kDefaultTol;
  int order = kDefaultOrder;
  int hull_resolution = 32;  // quarter-sweep density for the hull certificate
  bool with_hull = true;
};

namespace detail {

// The mapped and hull certificates require the Bloch vector along a
// coordinate axis; returns that axis or nullopt.
inline std::optional<int> bloch_axis(const Vec3& a) {
  if (a.norm() < 1e-12) return 2;
  for (int k = 0; k < 3; ++k) {
    bool others_zero = true;
    for (int i = 0; i < 3; ++i)
      if (i != k && std::abs(a[i]) > 1e-12) others_zero = false;
    if (others_zero && std::abs(a[k]) > 1e-12) return k;
  }
  return std::nullopt;
}

}  // namespace detail

// Applies, in order: physicality, PPT separability, the Bowles criterion,
// mapped-boundary membership (radial comparison at the state's direction),
// and hull membership. First matching label wins.
inline RegionLabel classify(const CanonicalState& s, const ClassifyConfig& cfg = {}) {
  const BlochState bs = s.to_bloch();
  if (!is_physical(bs, cfg.tol)) return RegionLabel::nonphysical;
  if (is_separable_ppt(bs, cfg.tol)) return RegionLabel::separable;
  if (bowles_value(s) <= 1.0 + cfg.tol) return RegionLabel::nonsteerable_bowles;

  const auto axis = detail::bloch_axis(s.a);
  if (!axis) return RegionLabel::entangled_unknown;

  // Relabel axes so the Bloch vector sits on e_z; border radii depend only
  // on per-axis magnitudes, so signs need no tracking.
  const int k = *axis;
  Vec3 t = s.t;
  if (k != 2) std::swap(t[k], t[2]);
  const double a_mag = std::abs(s.a[k]);
  const double r_state = t.norm();
  const double alpha = std::acos(std::clamp(r_state > 0 ? t[2] / r_state : 1.0, -1.0, 1.0));
  const double beta = std::atan2(t[1], t[0]);

  const SphereRule rule = build_sphere_rule(cfg.order);
  const auto mapped = mapped_boundary_radius(a_mag, RayDirection{alpha, beta}, rule);
  if (r_state <= mapped.r + cfg.tol) return RegionLabel::nonsteerable_mapped;

  if (cfg.with_hull) {
    const auto sweep = detail::sweep_borders(a_mag, beta, 4 * cfg.hull_resolution, rule,
                                             cfg.tol, std::sqrt(3.0) + 0.2);
    const Polygon hull = detail::hull_from_sweep(sweep, {});
    const Vec2 pt(r_state * std::sin(alpha), r_state * std::cos(alpha));
    if (polygon_contains(hull, pt, cfg.tol)) return RegionLabel::nonsteerable_hull;
  }
  return RegionLabel::entangled_unknown;
}

// All border radii along the state's own ray, for reporting. The mapped and
// hull borders are only defined when the Bloch vector is axis-aligned.
struct BorderDistances {
  double r_state = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double a_mag = 0.0;
  bool axis_aligned = false;
  double r_physical = std::numeric_limits<double>::quiet_NaN();
  double r_ppt = std::numeric_limits<double>::quiet_NaN();
  double r_bowles = std::numeric_limits<double>::quiet_NaN();
  double r_mapped = std::numeric_limits<double>::quiet_NaN();
  double r_hull = std::numeric_limits<double>::quiet_NaN();
};

inline BorderDistances border_distances(const CanonicalState& s,
                                        const ClassifyConfig& cfg = {}) {
  BorderDistances out;
  out.r_state = s.t.norm();
  out.a_mag = s.a.norm();

  Vec3 t = s.t;
  const auto axis = detail::bloch_axis(s.a);
  out.axis_aligned = axis.has_value();
  if (axis && *axis != 2) std::swap(t[*axis], t[2]);
  const double r = t.norm();
  out.alpha = std::acos(std::clamp(r > 0 ? t[2] / r : 1.0, -1.0, 1.0));
  out.beta = std::atan2(t[1], t[0]);
  const RayDirection dir{out.alpha, out.beta};
  const Vec3 a_perm = axis ? Vec3(0, 0, out.a_mag) : s.a;
  const double r_max = std::sqrt(3.0) + 0.2;

  out.r_physical = boundary_radius_along_ray(
      [&](const CanonicalState& c) { return detail::physical_pred(c, cfg.tol); }, a_perm, dir,
      r_max, 1e-10);
  out.r_ppt = boundary_radius_along_ray(
      [&](const CanonicalState& c) { return detail::separable_pred(c, cfg.tol); }, a_perm, dir,
      r_max, 1e-10);
  out.r_bowles = boundary_radius_along_ray(
      [&](const CanonicalState& c) { return detail::bowles_pred(c, cfg.tol); }, a_perm, dir,
      r_max, 1e-10);

  if (axis) {
    const SphereRule rule = build_sphere_rule(cfg.order);
    out.r_mapped = mapped_boundary_radius(out.a_mag, dir, rule).r;
    if (cfg.with_hull) {
      const auto sweep = detail::sweep_borders(out.a_mag, out.beta, 4 * cfg.hull_resolution,
                                               rule, cfg.tol, r_max);
      const Polygon hull = detail::hull_from_sweep(sweep, {});
      out.r_hull = polygon_ray_exit(hull, Vec2(std::sin(out.alpha), std::cos(out.alpha)));
    }
  }
  return out;
}

namespace detail {

inline RegionLabel label_from_radii(double r, const SliceRow& row, double tol) {
  if (r > row.r_physical + tol) return RegionLabel::nonphysical;
  if (r <= row.r_ppt + tol) return RegionLabel::separable;
  if (r <= row.r_bowles + tol) return RegionLabel::nonsteerable_bowles;
  if (r <= row.r_mapped + tol) return RegionLabel::nonsteerable_mapped;
  if (r <= row.r_hull + tol) return RegionLabel::nonsteerable_hull;
  return RegionLabel::entangled_unknown;
}

inline std::string iso8601_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

inline SliceTable fig2_slice(const SliceSpec& spec) {
  SliceTable table;
  const double iso_alpha = std::acos(-1.0 / std::sqrt(3.0));
  const double iso_beta = 5.0 * std::numbers::pi / 4.0;
  const RayDirection dir{iso_alpha, iso_beta};
  const double sqrt3 = std::sqrt(3.0);

  table.rows.resize(spec.resolution);
  for (int i = 0; i < spec.resolution; ++i) {
    const double a = static_cast<double>(i) / (spec.resolution - 1);
    SliceRow& row = table.rows[i];
    row.ray = a;
    row.r_physical = boundary_radius_along_ray(
                         [&](const CanonicalState& s) { return physical_pred(s, spec.tol); },
                         a, dir, spec.r_max, 1e-10) /
                     sqrt3;
    row.r_ppt = boundary_radius_along_ray(
                    [&](const CanonicalState& s) { return separable_pred(s, spec.tol); }, a,
                    dir, spec.r_max, 1e-10) /
                sqrt3;
    row.r_bowles = 0.5 * (1.0 - a * a);
    row.r_mapped = displaced_werner_xi(a);
    row.u_star = row.v_star = std::asin(std::sqrt(a));
    row.converged = true;
    row.w = a;
    row.z = row.r_mapped;
  }

  // Hull in the (a, xi) plane: the family is convex in its two parameters,
  // so the upper envelope of the certified borders (plus the xi = 0 base)
  // is again certified.
  std::vector<Vec2> pts{{0.0, 0.0}, {1.0, 0.0}};
  for (const SliceRow& row : table.rows) {
    pts.emplace_back(row.ray, row.r_ppt);
    pts.emplace_back(row.ray, row.r_bowles);
    pts.emplace_back(row.ray, row.r_mapped);
  }
  const Polygon hull{convex_hull_2d(std::move(pts))};
  for (SliceRow& row : table.rows) {
    double best = 0.0;
    const auto& v = hull.vertices;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Vec2& p = v[i];
      const Vec2& q = v[(i + 1) % v.size()];
      if (std::abs(q.x() - p.x()) < 1e-15) {
        if (std::abs(p.x() - row.ray) < 1e-12) best = std::max({best, p.y(), q.y()});
        continue;
      }
      const double tau = (row.ray - p.x()) / (q.x() - p.x());
      if (tau < -1e-12 || tau > 1.0 + 1e-12) continue;
      best = std::max(best, p.y() + tau * (q.y() - p.y()));
    }
    row.r_hull = best;
    row.label = label_from_radii(row.r_mapped, row, spec.tol);
  }
  return table;
}

inline SliceTable meridian_slice(const SliceSpec& spec) {
  SliceTable table;
  const double beta = slice_beta(spec);
  const SphereRule rule = build_sphere_rule(spec.order);

  table.rows.resize(spec.resolution);
  std::vector<Vec2> row_points;
  for (int i = 0; i < spec.resolution; ++i) {
    const double alpha =
        std::numbers::pi / 2 + std::numbers::pi / 2 * (i + 1) / (spec.resolution + 1);
    const RayDirection dir{alpha, beta};
    SliceRow& row = table.rows[i];
    row.ray = alpha;
    row.r_physical = boundary_radius_along_ray(
        [&](const CanonicalState& s) { return physical_pred(s, spec.tol); }, spec.a, dir,
        spec.r_max, 1e-10);
    row.r_ppt = boundary_radius_along_ray(
        [&](const CanonicalState& s) { return separable_pred(s, spec.tol); }, spec.a, dir,
        spec.r_max, 1e-10);
    row.r_bowles = boundary_radius_along_ray(
        [&](const CanonicalState& s) { return bowles_pred(s, spec.tol); }, spec.a, dir,
        spec.r_max, 1e-10);
    const auto mapped = mapped_boundary_radius(spec.a, dir, rule);
    row.r_mapped = mapped.r;
    row.u_star = mapped.u_star;
    row.v_star = mapped.v_star;
    row.converged = mapped.converged;
    row.w = row.r_mapped * std::sin(alpha);
    row.z = row.r_mapped * std::cos(alpha);

    const Vec2 u(std::sin(alpha), std::cos(alpha));
    row_points.push_back(row.r_mapped * u);
    row_points.push_back(row.r_bowles * u);
    row_points.push_back(row.r_ppt * u);
  }

  // Row border points are added to the sweep so that per-ray hull radii
  // dominate the row radii exactly, not just up to chord sag.
  const int n_psi = 4 * spec.resolution;
  const auto sweep = sweep_borders(spec.a, beta, n_psi, rule, spec.tol, spec.r_max);
  const Polygon hull = hull_from_sweep(sweep, row_points);
  for (SliceRow& row : table.rows) {
    row.r_hull = polygon_ray_exit(hull, Vec2(std::sin(row.ray), std::cos(row.ray)));
    row.label = label_from_radii(row.r_mapped, row, spec.tol);
  }
  return table;
}

}  // namespace detail

inline SliceTable figure_slice(const SliceSpec& spec) {
  if (spec.resolution < 16) throw invalid_input("figure_slice: resolution must be >= 16");
  if (spec.figure != SliceSpec::Figure::fig2 && !(spec.a >= 0.0 && spec.a < 1.0))
    throw invalid_input("figure_slice: a must lie in [0, 1)");

  SliceTable table = spec.figure == SliceSpec::Figure::fig2 ? detail::fig2_slice(spec)
                                                            : detail::meridian_slice(spec);

  SliceMetadata& meta = table.meta;
  switch (spec.figure) {
    case SliceSpec::Figure::fig2: meta.figure = "fig2"; break;
    case SliceSpec::Figure::fig3a: meta.figure = "fig3a"; break;
    case SliceSpec::Figure::fig3b: meta.figure = "fig3b"; break;
    case SliceSpec::Figure::custom: meta.figure = "custom"; break;
  }
  meta.a = spec.a;
  meta.ratio = spec.ratio;
  meta.beta = spec.figure == SliceSpec::Figure::fig2 ? 5.0 * std::numbers::pi / 4.0
                                                     : slice_beta(spec);
  meta.resolution = spec.resolution;
  meta.order = spec.order;
  meta.tol = spec.tol;

  // Quadrature convergence pair on a representative direction of the slice.
  const RayDirection mid = spec.figure == SliceSpec::Figure::fig2
                               ? RayDirection{std::acos(-1.0 / std::sqrt(3.0)),
                                              5.0 * std::numbers::pi / 4.0}
                               : RayDirection{0.75 * std::numbers::pi, meta.beta};
  meta.convergence_g = mean_norm(build_sphere_rule(spec.order), Vec3(mid.unit()));
  meta.convergence_g_refined = mean_norm(build_sphere_rule(2 * spec.order), Vec3(mid.unit()));
  meta.generated_at = detail::iso8601_now();
  return table;
}

}  // namespace qsteer
