#include <cmath>
#include <numbers>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "qsteer/random_states.hpp"
#include "qsteer/regions.hpp"

using namespace qsteer;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double shoelace_area(const std::vector<Vec2>& poly) {
  double acc = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % poly.size()];
    acc += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * acc;
}

CanonicalState werner(double mu) {
  CanonicalState s;
  s.t = Vec3(-mu, -mu, -mu);
  return s;
}

}  // namespace

TEST_CASE("classify precedence on Werner states") {
  ClassifyConfig cfg;
  cfg.with_hull = false;
  CHECK(classify(werner(1.2), cfg) == RegionLabel::nonphysical);
  CHECK(classify(werner(0.3), cfg) == RegionLabel::separable);
  CHECK(classify(werner(0.45), cfg) == RegionLabel::nonsteerable_bowles);
}

TEST_CASE("classify detects mapped-only and unknown states") {
  ClassifyConfig cfg;
  cfg.order = 48;
  cfg.hull_resolution = 16;

  const double a = 0.1;
  const RayDirection dir{2.8, 5 * kPi / 4};
  const SphereRule rule = build_sphere_rule(cfg.order);
  const double r_map = mapped_boundary_radius(a, dir, rule).r;
  const double r_bow = boundary_radius_along_ray(
      [](const CanonicalState& s) { return bowles_value(s) <= 1.0 + kDefaultTol; }, a, dir,
      2.0, 1e-10);
  REQUIRE(r_map > r_bow + 1e-3);

  CanonicalState between;
  between.a = Vec3(0, 0, a);
  between.t = 0.5 * (r_map + r_bow) * dir.unit();
  cfg.with_hull = false;
  CHECK(classify(between, cfg) == RegionLabel::nonsteerable_mapped);

  // Beyond the hull but still physical: no certificate applies.
  cfg.with_hull = true;
  CanonicalState canonical;
  canonical.a = Vec3(0, 0, a);
  canonical.t = r_map * dir.unit();
  const BorderDistances d = border_distances(canonical, cfg);
  REQUIRE(d.r_hull < d.r_physical - 2e-3);
  CanonicalState outside;
  outside.a = Vec3(0, 0, a);
  outside.t = 0.5 * (d.r_hull + d.r_physical) * dir.unit();
  CHECK(classify(outside, cfg) == RegionLabel::entangled_unknown);

  // Stability: labels are unchanged under 1e-12 perturbations.
  CanonicalState nudged = between;
  nudged.t += Vec3(1e-12, -1e-12, 1e-12);
  nudged.a += Vec3(0, 0, 1e-12);
  cfg.with_hull = false;
  CHECK(classify(nudged, cfg) == RegionLabel::nonsteerable_mapped);
}

TEST_CASE("convex_hull_2d") {
  SECTION("square plus center") {
    const auto hull =
        convex_hull_2d({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}});
    REQUIRE(hull.size() == 4);
    CHECK(shoelace_area(hull) == Approx(1.0));  // counterclockwise: positive area
  }

  SECTION("random points in a disk stay inside their hull") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vec2> pts;
    while (pts.size() < 1000) {
      const Vec2 p(u(rng), u(rng));
      if (p.norm() <= 1.0) pts.push_back(p);
    }
    const Polygon hull{convex_hull_2d(pts)};
    for (const Vec2& p : pts) CHECK(polygon_contains(hull, p, 1e-12));
  }

  SECTION("hull of a union dominates both cloud hulls") {
    std::mt19937_64 rng(77);
    std::normal_distribution<double> n;
    std::vector<Vec2> cloud_a, cloud_b, both;
    for (int i = 0; i < 200; ++i) {
      cloud_a.emplace_back(n(rng), n(rng));
      cloud_b.emplace_back(0.5 + 0.5 * n(rng), 0.3 + 0.8 * n(rng));
    }
    both = cloud_a;
    both.insert(both.end(), cloud_b.begin(), cloud_b.end());
    const double area_union = shoelace_area(convex_hull_2d(both));
    CHECK(area_union >= shoelace_area(convex_hull_2d(cloud_a)) - 1e-12);
    CHECK(area_union >= shoelace_area(convex_hull_2d(cloud_b)) - 1e-12);
  }

  SECTION("degenerate inputs") {
    CHECK_THROWS_AS(convex_hull_2d({{0, 0}}), degenerate_hull);
    try {
      convex_hull_2d({{0, 0}, {1, 1}, {2, 2}, {3, 3}});
      FAIL("expected degenerate_hull");
    } catch (const degenerate_hull& e) {
      CHECK(e.collinear);
    }
  }
}

TEST_CASE("hull_region geometry") {
  SliceSpec spec = fig3a_spec();
  spec.resolution = 16;
  spec.order = 48;

  SECTION("fig3a hull reaches beyond the Bowles region away from isotropy") {
    const Polygon hull = hull_region(0.1, spec);
    REQUIRE(hull.vertices.size() >= 3);
    CHECK(polygon_contains(hull, Vec2(0, 0)));

    const double alpha = 2.9;
    const RayDirection dir{alpha, slice_beta(spec)};
    const double r_bow = boundary_radius_along_ray(
        [](const CanonicalState& s) { return bowles_value(s) <= 1.0 + kDefaultTol; }, 0.1,
        dir, 2.0, 1e-10);
    const double r_hull =
        polygon_ray_exit(hull, Vec2(std::sin(alpha), std::cos(alpha)));
    CHECK(r_hull > r_bow + 1e-3);
  }

  SECTION("at a = 0 the hull coincides with the T-state border") {
    const Polygon hull = hull_region(0.0, spec);
    const SphereRule rule = build_sphere_rule(spec.order);
    for (double alpha : {1.8, 2.2, 2.6, 3.0}) {
      const double r_hull =
          polygon_ray_exit(hull, Vec2(std::sin(alpha), std::cos(alpha)));
      const double r_tstate =
          tstate_boundary_radius(RayDirection{alpha, slice_beta(spec)}, rule);
      CHECK(r_hull == Approx(r_tstate).margin(0.01));
      CHECK(r_hull <= r_tstate + 1e-9);
    }
  }
}

TEST_CASE("figure_slice validation") {
  SliceSpec spec = fig3a_spec();
  spec.resolution = 8;
  CHECK_THROWS_AS(figure_slice(spec), invalid_input);
  spec.resolution = 16;
  spec.a = 1.0;
  CHECK_THROWS_AS(figure_slice(spec), invalid_input);
}

TEST_CASE("figure_slice fig2") {
  SliceSpec spec = fig2_spec();
  spec.resolution = 16;
  const SliceTable table = figure_slice(spec);
  REQUIRE(table.rows.size() == 16);
  CHECK(table.meta.figure == "fig2");
  CHECK(std::abs(table.meta.convergence_g - table.meta.convergence_g_refined) < 1e-8);

  const SliceRow& first = table.rows.front();
  CHECK(first.ray == 0.0);
  CHECK(first.r_bowles == Approx(0.5));
  CHECK(first.r_mapped == Approx(0.5));
  CHECK(first.r_ppt == Approx(1.0 / 3.0).margin(1e-6));
  CHECK(first.r_physical == Approx(1.0).margin(1e-6));
  CHECK(first.label == RegionLabel::nonsteerable_bowles);

  // a = 0.6 lands on the grid; the mapped curve does not beat Bowles here.
  const SliceRow& mid = table.rows[9];
  CHECK(mid.ray == Approx(0.6));
  CHECK(mid.r_bowles == Approx(0.32));
  CHECK(mid.r_mapped < mid.r_bowles);

  for (const SliceRow& row : table.rows) {
    CHECK(row.r_ppt <= row.r_physical + 1e-12);
    CHECK(row.r_hull >= std::max(row.r_bowles, row.r_mapped) - 1e-9);
    CHECK(row.w == row.ray);
    CHECK(row.z == row.r_mapped);
  }
}

TEST_CASE("figure_slice fig3a") {
  SliceSpec spec = fig3a_spec();
  spec.resolution = 16;
  spec.order = 48;
  const SliceTable table = figure_slice(spec);
  REQUIRE(table.rows.size() == 16);
  const SphereRule rule = build_sphere_rule(spec.order);

  for (const SliceRow& row : table.rows) {
    CHECK(row.converged);
    CHECK(row.ray > kPi / 2);
    CHECK(row.ray < kPi);
    CHECK(row.r_ppt <= row.r_physical + 1e-12);
    CHECK(row.r_bowles <= row.r_physical + 1e-12);
    CHECK(row.r_hull >= std::max(row.r_bowles, row.r_mapped) - 1e-9);

    const RayDirection dir{row.ray, table.meta.beta};
    CHECK(row.r_mapped <= tstate_boundary_radius(dir, rule) + 1e-9);

    // Feasibility and the symmetric-optimum property for t1' = t2'.
    CHECK(std::abs(std::sin(row.u_star) * std::sin(row.v_star) - spec.a) < 1e-10);
    CHECK(std::abs(row.u_star - row.v_star) <= 1e-5);

    // Emitted boundary states are physical.
    CanonicalState boundary;
    boundary.a = Vec3(0, 0, spec.a);
    boundary.t = row.r_mapped * dir.unit();
    CHECK(is_physical(boundary.to_bloch(), 1e-7));

    CHECK(row.w == Approx(row.r_mapped * std::sin(row.ray)));
    CHECK(row.z == Approx(row.r_mapped * std::cos(row.ray)).margin(1e-15));
  }
}

TEST_CASE("figure_slice fig3b") {
  SliceSpec spec = fig3b_spec();
  spec.resolution = 16;
  spec.order = 48;
  const SliceTable table = figure_slice(spec);
  CHECK(table.meta.ratio == 0.5);

  for (const SliceRow& row : table.rows) {
    CHECK(row.r_mapped > row.r_bowles + 1e-6);
    // The hull border follows the mapped border across the octant.
    CHECK(row.r_hull >= row.r_mapped - 1e-9);
    CHECK(row.r_hull <= row.r_mapped + 1e-6);
  }
}
