#include <cmath>
#include <numbers>
#include <random>

#include <catch2/catch_amalgamated.hpp>

#include "qsteer/bloch.hpp"
#include "qsteer/boundaries.hpp"
#include "qsteer/random_states.hpp"
#include "qsteer/sphere_quadrature.hpp"

using namespace qsteer;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

const SphereRule& default_rule() {
  static const SphereRule rule = build_sphere_rule(kDefaultOrder);
  return rule;
}

RayDirection isotropic_negative() {
  return {std::acos(-1.0 / std::sqrt(3.0)), 5.0 * kPi / 4.0};
}

// Exact Bowles value for a along z and diagonal t: with s = x3^2 the
// objective reduces to the concave h(s) = a^2 s + 2 sqrt(m (1-s) + t3^2 s),
// m = max(t1^2, t2^2), maximized on [0, 1].
double bowles_closed_form(double az, const Vec3& t) {
  const double a2 = az * az;
  const double m = std::max(t[0] * t[0], t[1] * t[1]);
  const double q = t[2] * t[2];
  auto h = [&](double s) { return a2 * s + 2.0 * std::sqrt(m * (1.0 - s) + q * s); };
  double best = std::max(h(0.0), h(1.0));
  if (a2 > 0.0 && m != q) {
    const double w = (m - q) / a2;
    if (w > 0.0) {
      const double s = (w * w - m) / (q - m);
      if (s > 0.0 && s < 1.0) best = std::max(best, h(s));
    }
  }
  return best;
}

}  // namespace

TEST_CASE("tstate_boundary_radius") {
  const auto& rule = default_rule();

  // Werner threshold: isotropic direction, per-axis value 1/2.
  const double r_iso = tstate_boundary_radius(isotropic_negative(), rule);
  CHECK(r_iso / std::sqrt(3.0) == Approx(0.5).margin(1e-8));

  // Pole direction.
  CHECK(tstate_boundary_radius({0.0, 0.0}, rule) == Approx(1.0).margin(1e-10));

  // Oblate direction against the axisymmetric closed form g = pi/2 * r.
  const RayDirection oblate{kPi / 2, kPi / 4};  // diag(1,1,0)/sqrt(2)
  CHECK(tstate_boundary_radius(oblate, rule) ==
        Approx(1.0 / (kPi / 2 / std::sqrt(2.0))).margin(1e-8));
}

TEST_CASE("bowles_value closed forms") {
  // Werner: 2 mu.
  for (double mu : {0.1, 0.5, 0.8}) {
    CanonicalState s;
    s.t = Vec3(-mu, -mu, -mu);
    CHECK(bowles_value(s) == Approx(2.0 * mu).margin(1e-9));
  }

  // Displaced Werner: a^2 + 2 xi, maximum along z.
  CanonicalState s;
  s.a = Vec3(0, 0, 0.4);
  s.t = Vec3(-0.3, -0.3, -0.3);
  CHECK(bowles_value(s) == Approx(0.16 + 0.6).margin(1e-9));
}

TEST_CASE("bowles_value against oracles") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ua(0.0, 0.9), ut(-1.0, 1.0);

  for (int trial = 0; trial < 20; ++trial) {
    CanonicalState s;
    s.a = Vec3(0, 0, ua(rng));
    s.t = Vec3(ut(rng), ut(rng), ut(rng));
    CHECK(bowles_value(s) == Approx(bowles_closed_form(s.a[2], s.t)).margin(1e-9));
  }

  // Random-direction brute force on a general (non-axis-aligned) state.
  CanonicalState s;
  s.a = Vec3(0.3, -0.2, 0.4);
  s.t = Vec3(-0.6, 0.45, -0.3);
  double brute = 0.0;
  for (int i = 0; i < 1000000; ++i) {
    const Vec3 x = random_unit_vector(rng);
    const double ax = s.a.dot(x);
    brute = std::max(brute, ax * ax + 2.0 * std::sqrt(s.t[0] * s.t[0] * x[0] * x[0] +
                                                      s.t[1] * s.t[1] * x[1] * x[1] +
                                                      s.t[2] * s.t[2] * x[2] * x[2]));
  }
  const double refined = bowles_value(s);
  CHECK(refined >= brute - 1e-9);
  CHECK(refined == Approx(brute).margin(1e-6));
}

TEST_CASE("mapped_boundary_radius basics") {
  const auto& rule = default_rule();
  const RayDirection iso = isotropic_negative();

  SECTION("input validation") {
    CHECK_THROWS_AS(mapped_boundary_radius(-0.1, iso, rule), invalid_input);
    CHECK_THROWS_AS(mapped_boundary_radius(1.0, iso, rule), invalid_input);
  }

  SECTION("a = 0 reduces to the T-state boundary") {
    for (const RayDirection dir :
         {iso, RayDirection{2.0, kPi / 4}, RayDirection{2.8, 5 * kPi / 4}}) {
      const auto sample = mapped_boundary_radius(0.0, dir, rule);
      CHECK(std::abs(sample.r - tstate_boundary_radius(dir, rule)) < 1e-9);
      CHECK(sample.u_star == 0.0);
      CHECK(sample.v_star == 0.0);
    }
  }

  SECTION("isotropic direction: symmetric optimizer") {
    const auto sample = mapped_boundary_radius(0.1, iso, rule);
    CHECK(std::abs(sample.u_star - sample.v_star) < 1e-6);
    CHECK(sample.converged);
  }

  SECTION("feasibility constraint holds at the reported optimum") {
    for (double a : {0.05, 0.3, 0.6, 0.9}) {
      const auto sample = mapped_boundary_radius(a, RayDirection{2.1, 5 * kPi / 4}, rule);
      CHECK(std::abs(std::sin(sample.u_star) * std::sin(sample.v_star) - a) < 1e-10);
    }
  }
}

TEST_CASE("mapped_boundary_radius against a dense grid search") {
  const auto& rule = default_rule();
  const double a = 0.1;
  const RayDirection dir{2.0, kPi / 4};
  const Vec3 d = dir.unit();

  auto objective = [&](double u, double v) {
    const double lam[3] = {std::cos(u), std::cos(v), std::cos(u) * std::cos(v)};
    Vec3 e;
    for (int i = 0; i < 3; ++i) {
      if (std::abs(lam[i]) < 1e-8) return std::numeric_limits<double>::infinity();
      e[i] = d[i] / lam[i];
    }
    return mean_norm(rule, e);
  };

  // Independent 400x400 sweep of the feasible set, entered from both angles.
  double best = std::numeric_limits<double>::infinity();
  const double u_min = std::asin(a);
  for (int i = 0; i < 400; ++i) {
    const double u = u_min + (kPi / 2 - u_min) * i / 400.0;
    if (std::sin(u) < a) continue;
    const double v = std::asin(a / std::sin(u));
    best = std::min(best, objective(u, v));
    best = std::min(best, objective(v, u));
  }

  const auto sample = mapped_boundary_radius(a, dir, rule);
  CHECK(sample.r == Approx(1.0 / best).margin(1e-6));
  CHECK(1.0 / sample.r <= best + 1e-9);  // optimizer at least as good as every grid value
}

TEST_CASE("mapped_boundary_radius invariants") {
  const auto& rule = default_rule();
  const RayDirection dirs[] = {isotropic_negative(), {1.9, 5 * kPi / 4}, {2.6, 4.2}};

  SECTION("monotone shrinkage in a") {
    for (const auto& dir : dirs) {
      double prev = std::numeric_limits<double>::infinity();
      for (double a : {0.0, 0.2, 0.4, 0.6, 0.8}) {
        const double r = mapped_boundary_radius(a, dir, rule).r;
        CHECK(r <= prev + 1e-12);
        prev = r;
      }
    }
  }

  SECTION("mapped radius never exceeds the T-state radius") {
    for (const auto& dir : dirs)
      for (double a : {0.1, 0.5})
        CHECK(mapped_boundary_radius(a, dir, rule).r <=
              tstate_boundary_radius(dir, rule) + 1e-12);
  }

  SECTION("swapping the two transverse direction components changes nothing") {
    for (double a : {0.1, 0.4}) {
      const RayDirection dir{2.0, 1.0};
      const Vec3 d = dir.unit();
      const RayDirection swapped{2.0, std::atan2(d[0], d[1])};  // exchanges d1 and d2
      CHECK(mapped_boundary_radius(a, dir, rule).r ==
            Approx(mapped_boundary_radius(a, swapped, rule).r).margin(1e-10));
    }
  }
}

TEST_CASE("displaced_werner_xi") {
  CHECK(displaced_werner_xi(0.0) == 0.5);
  CHECK(displaced_werner_xi(1.0) == 0.0);
  CHECK_THROWS_AS(displaced_werner_xi(-0.01), invalid_input);
  CHECK_THROWS_AS(displaced_werner_xi(1.01), invalid_input);

  // Continuity toward both limits.
  CHECK(displaced_werner_xi(1e-12) == Approx(0.5).margin(1e-6));
  CHECK(displaced_werner_xi(1.0 - 1e-12) == Approx(0.0).margin(1e-6));

  // Numeric pipeline agreement on the isotropic direction (xi = r / sqrt 3).
  const auto& rule = default_rule();
  for (double a : {0.25, 0.5, 0.75}) {
    const double xi = displaced_werner_xi(a);
    const double r = mapped_boundary_radius(a, isotropic_negative(), rule).r;
    CHECK(std::abs(r / std::sqrt(3.0) - xi) / xi < 1e-6);
  }
}

TEST_CASE("degenerate_t_radius branch structure") {
  CHECK_THROWS_AS(degenerate_t_radius(1.0, 2.0), invalid_input);

  // All-negative octant: c < -1 and the printed branch is not real.
  try {
    degenerate_t_radius(0.1, 2.0);
    FAIL("expected branch_domain_error");
  } catch (const branch_domain_error& e) {
    CHECK(e.a == 0.1);
    CHECK(e.alpha == 2.0);
    CHECK(e.c < -1.0);
  }

  // Both branches agree across the c = 0 crossover.
  const double a = 0.1;
  auto alpha_of_c = [a](double c) { return std::atan(2.0 / ((1.0 + c) * (1.0 - a))); };
  const double below = degenerate_t_radius(a, alpha_of_c(-1e-9));
  const double above = degenerate_t_radius(a, alpha_of_c(1e-9));
  CHECK(below == Approx(above).margin(1e-6));
}

TEST_CASE("degenerate_t audit against the numeric reference") {
  const SphereRule rule = build_sphere_rule(48);
  const SphereRule fine = build_sphere_rule(96);

  // Fig. 3(a) range: branch-domain everywhere, reference self-consistent.
  for (int i = 0; i < 8; ++i) {
    const double alpha = kPi / 2 + kPi / 2 * (i + 1) / 9.0;
    const auto audit = audit_degenerate_t(0.1, alpha, rule, fine);
    CHECK_FALSE(audit.printed_valid);
    CHECK(audit.c < -1.0);
    CHECK_FALSE(audit.branch_error.empty());
    CHECK(std::abs(audit.reference_r - audit.reference_refined) < 1e-8);
    CHECK(audit.converged);
  }

  // Where the printed formula is real, the audit reports the discrepancy.
  const auto audit = audit_degenerate_t(0.1, 0.8, rule, fine);
  CHECK(audit.printed_valid);
  CHECK(std::isfinite(audit.printed_r));
  CHECK(std::isfinite(audit.discrepancy));
  CHECK(audit.discrepancy == Approx(std::abs(audit.printed_r - audit.reference_r)));

  // At a = 0 the reference pipeline must hit the exact isotropic value at
  // the isotropic angle; the printed value is recorded alongside.
  const auto iso_audit = audit_degenerate_t(0.0, std::atan(std::sqrt(2.0)), rule, fine);
  CHECK(iso_audit.reference_r == Approx(std::sqrt(3.0) / 2).margin(1e-8));
  CHECK(iso_audit.printed_valid);
}

TEST_CASE("boundary_radius_along_ray") {
  const RayDirection iso = isotropic_negative();

  const double r_phys = boundary_radius_along_ray(
      [](const CanonicalState& s) { return is_physical(s.to_bloch(), 1e-9); }, 0.0, iso, 2.0,
      1e-10);
  CHECK(r_phys / std::sqrt(3.0) == Approx(1.0).margin(1e-8));

  const double r_ppt = boundary_radius_along_ray(
      [](const CanonicalState& s) {
        const Mat4c rho = density_matrix(s.to_bloch());
        return min_eigenvalue(rho) >= -1e-9 &&
               min_eigenvalue(partial_transpose_b(rho)) >= -1e-9;
      },
      0.0, iso, 2.0, 1e-10);
  CHECK(r_ppt / std::sqrt(3.0) == Approx(1.0 / 3.0).margin(1e-8));

  for (double a : {0.0, 0.3}) {
    const double r_bowles = boundary_radius_along_ray(
        [](const CanonicalState& s) { return bowles_value(s) <= 1.0; }, a, iso, 2.0, 1e-10);
    CHECK(r_bowles / std::sqrt(3.0) == Approx(0.5 * (1.0 - a * a)).margin(1e-6));
  }

  SECTION("error paths") {
    CHECK_THROWS_AS(
        boundary_radius_along_ray([](const CanonicalState&) { return false; }, 0.0, iso, 2.0,
                                  1e-10),
        invalid_input);
    CHECK_THROWS_AS(boundary_radius_along_ray(
                        [](const CanonicalState& s) {
                          const double r = s.t.norm();
                          return r < 0.3 || (r > 0.5 && r < 0.6);
                        },
                        0.0, iso, 2.0, 1e-10),
                    non_monotone_predicate);
  }

  SECTION("predicate true everywhere returns r_max") {
    CHECK(boundary_radius_along_ray([](const CanonicalState&) { return true; }, 0.0, iso, 1.5,
                                    1e-10) == 1.5);
  }
}
