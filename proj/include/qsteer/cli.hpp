#pragma once

// Command-line front end: classification, boundary evaluation, channel
// inspection, figure-data export and a reduced-resolution selftest.
// Exit codes: 0 success, 2 invalid input, 3 numerical failure.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsteer/bloch.hpp"
#include "qsteer/boundaries.hpp"
#include "qsteer/channels.hpp"
#include "qsteer/errors.hpp"
#include "qsteer/random_states.hpp"
#include "qsteer/regions.hpp"
#include "qsteer/slice_io.hpp"
#include "qsteer/sphere_quadrature.hpp"
#include "qsteer/version.hpp"

namespace qsteer::cli {

namespace detail {

inline double iso_alpha() { return std::acos(-1.0 / std::sqrt(3.0)); }
inline double iso_beta() { return 5.0 * std::numbers::pi / 4.0; }

struct StateFlags {
  double ax = 0.0, ay = 0.0, az = 0.0;
  double t1 = 0.0, t2 = 0.0, t3 = 0.0;
  std::string file;
};

inline void add_state_flags(CLI::App* cmd, StateFlags& f) {
  cmd->add_option("--state", f.file,
                  "JSON state file with flat keys ax,ay,az,bx,by,bz,t11..t33");
  cmd->add_option("--ax", f.ax, "Alice Bloch x component");
  cmd->add_option("--ay", f.ay, "Alice Bloch y component");
  cmd->add_option("--az", f.az, "Alice Bloch z component");
  cmd->add_option("--a", f.az, "shorthand for --az (Bloch vector along z)");
  cmd->add_option("--t1", f.t1, "T diagonal entry 1");
  cmd->add_option("--t2", f.t2, "T diagonal entry 2");
  cmd->add_option("--t3", f.t3, "T diagonal entry 3");
}

inline BlochState load_state(const StateFlags& f) {
  if (f.file.empty()) {
    CanonicalState s;
    s.a = Vec3(f.ax, f.ay, f.az);
    s.t = Vec3(f.t1, f.t2, f.t3);
    return s.to_bloch();
  }
  std::ifstream in(f.file);
  if (!in) throw invalid_input("cannot open state file: " + f.file);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw invalid_input(std::string("state file is not valid JSON: ") + e.what());
  }
  auto get = [&](const char* key) { return j.value(key, 0.0); };
  BlochState s;
  s.a = Vec3(get("ax"), get("ay"), get("az"));
  s.b = Vec3(get("bx"), get("by"), get("bz"));
  s.T << get("t11"), get("t12"), get("t13"), get("t21"), get("t22"), get("t23"), get("t31"),
      get("t32"), get("t33");
  return s;
}

// Writes either to --out or to the session stream.
struct Sink {
  std::ostream* os;
  std::ofstream file;

  explicit Sink(std::ostream& fallback, const std::string& path) {
    if (path.empty()) {
      os = &fallback;
    } else {
      file.open(path);
      if (!file) throw invalid_input("cannot open output file: " + path);
      os = &file;
    }
  }
};

inline Perm3 parse_perm(const std::vector<int>& p) {
  if (p.empty()) return Perm3{0, 1, 2};
  if (p.size() != 3) throw invalid_input("--perm needs exactly 3 indices");
  Perm3 perm{p[0], p[1], p[2]};
  check_perm(perm);
  return perm;
}

inline std::string fmt_vec(const Vec3& v) {
  return format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]);
}

inline int run_classify(std::ostream& out, const StateFlags& flags, int order, double tol,
                        bool with_hull, int hull_resolution, const std::string& format) {
  const BlochState input = load_state(flags);
  ClassifyConfig cfg;
  cfg.order = order;
  cfg.tol = tol;
  cfg.with_hull = with_hull;
  cfg.hull_resolution = hull_resolution;

  nlohmann::json j;
  if (!is_physical(input, tol)) {
    j["label"] = std::string(to_string(RegionLabel::nonphysical));
  } else {
    const auto [canonical, record] = canonical_form(input);
    const RegionLabel label = classify(canonical, cfg);
    const BorderDistances d = border_distances(canonical, cfg);
    j["label"] = std::string(to_string(label));
    j["canonical_a"] = {canonical.a[0], canonical.a[1], canonical.a[2]};
    j["canonical_t"] = {canonical.t[0], canonical.t[1], canonical.t[2]};
    j["canonical_identity"] = record.identity;
    j["r_state"] = d.r_state;
    j["alpha"] = d.alpha;
    j["beta"] = d.beta;
    j["a_mag"] = d.a_mag;
    j["r_physical"] = d.r_physical;
    j["r_ppt"] = d.r_ppt;
    j["r_bowles"] = d.r_bowles;
    j["r_mapped"] = d.r_mapped;
    j["r_hull"] = d.r_hull;
  }
  j["order"] = order;
  j["tol"] = tol;

  if (format == "json") {
    out << j.dump(2) << "\n";
  } else {
    out << "label=" << j["label"].get<std::string>() << "\n";
    for (const char* key : {"r_state", "alpha", "beta", "a_mag", "r_physical", "r_ppt",
                            "r_bowles", "r_mapped", "r_hull"})
      if (j.contains(key)) out << key << "=" << format_double(j[key].get<double>()) << "\n";
  }
  return 0;
}

inline int run_degenerate_t(std::ostream& out, double a, double alpha, int grid, int order,
                            double beta, const std::string& format) {
  auto row_json = [](const DegenerateTAudit& audit) {
    nlohmann::json row{
        {"alpha", audit.alpha},
        {"c", audit.c},
        {"printed_valid", audit.printed_valid},
        {"reference_r", audit.reference_r},
        {"reference_refined", audit.reference_refined},
        {"self_consistency", std::abs(audit.reference_r - audit.reference_refined)},
    };
    if (audit.printed_valid) {
      row["printed_r"] = audit.printed_r;
      row["discrepancy"] = audit.discrepancy;
    } else {
      row["branch_error"] = audit.branch_error;
    }
    return row;
  };

  if (grid <= 0) {
    const DegenerateTAudit audit = audit_degenerate_t(a, alpha, order, beta);
    if (format == "json") {
      nlohmann::json j = row_json(audit);
      j["a"] = a;
      j["order"] = order;
      j["beta"] = beta;
      out << j.dump(2) << "\n";
    } else {
      out << "a=" << format_double(a) << "\n";
      out << "alpha=" << format_double(audit.alpha) << "\n";
      out << "c=" << format_double(audit.c) << "\n";
      out << "printed_valid=" << (audit.printed_valid ? 1 : 0) << "\n";
      if (audit.printed_valid) {
        out << "printed_r=" << format_double(audit.printed_r) << "\n";
        out << "discrepancy=" << format_double(audit.discrepancy) << "\n";
      } else {
        out << "branch_error=" << audit.branch_error << "\n";
      }
      out << "reference_r=" << format_double(audit.reference_r) << "\n";
      out << "reference_refined=" << format_double(audit.reference_refined) << "\n";
      out << "self_consistency="
          << format_double(std::abs(audit.reference_r - audit.reference_refined)) << "\n";
    }
    return (audit.converged ? 0 : 3);
  }

  // Grid audit over the open interval (pi/2, pi), the Fig. 3(a) range.
  const SphereRule rule = build_sphere_rule(order);
  const SphereRule fine = build_sphere_rule(2 * order);
  std::vector<DegenerateTAudit> audits;
  audits.reserve(grid);
  for (int i = 0; i < grid; ++i) {
    const double al = std::numbers::pi / 2 + std::numbers::pi / 2 * (i + 1) / (grid + 1);
    audits.push_back(audit_degenerate_t(a, al, rule, fine, beta));
  }
  if (format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& audit : audits) rows.push_back(row_json(audit));
    nlohmann::json j{{"metadata",
                      {{"a", a}, {"order", order}, {"beta", beta}, {"grid", grid},
                       {"version", std::string(kVersion)}}},
                     {"rows", rows}};
    out << j.dump(2) << "\n";
  } else {
    out << "# a=" << format_double(a) << "\n";
    out << "# order=" << order << "\n";
    out << "# beta=" << format_double(beta) << "\n";
    out << "# version=" << kVersion << "\n";
    out << "alpha,c,printed_valid,printed_r,reference_r,reference_refined,self_consistency,"
           "discrepancy,branch_error\n";
    for (const auto& audit : audits) {
      out << format_double(audit.alpha) << ',' << format_double(audit.c) << ','
          << (audit.printed_valid ? 1 : 0) << ','
          << (audit.printed_valid ? format_double(audit.printed_r) : "nan") << ','
          << format_double(audit.reference_r) << ',' << format_double(audit.reference_refined)
          << ',' << format_double(std::abs(audit.reference_r - audit.reference_refined))
          << ',' << (audit.printed_valid ? format_double(audit.discrepancy) : "nan") << ','
          << (audit.printed_valid ? "" : "1+c<0") << "\n";
    }
  }
  for (const auto& audit : audits)
    if (!audit.converged) return 3;
  return 0;
}

inline int run_selftest(std::ostream& out, int order) {
  int failures = 0;
  auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
    out << (ok ? "[ok]   " : "[FAIL] ") << name;
    if (!ok && !detail.empty()) out << ": " << detail;
    out << "\n";
    if (!ok) ++failures;
  };
  const double pi = std::numbers::pi;
  const SphereRule rule = build_sphere_rule(order);

  check("quadrature: weights sum to 4pi",
        std::abs(integrate_sphere(rule, [](const Vec3&) { return 1.0; }) - 4 * pi) < 1e-10);
  check("quadrature: integral of |x3| is 2pi",
        std::abs(integrate_sphere(rule, [](const Vec3& x) { return std::abs(x[2]); }) -
                 2 * pi) < 1e-10);
  check("quadrature: second moments are 4pi/3",
        std::abs(integrate_sphere(rule, [](const Vec3& x) { return x[0] * x[0]; }) -
                 4 * pi / 3) < 1e-10);
  check("mean_norm: identity gives 2",
        std::abs(mean_norm(rule, Mat3(Mat3::Identity())) - 2.0) < 1e-10);
  check("mean_norm: homogeneity",
        std::abs(mean_norm(rule, Vec3(2.0 * Vec3(0.3, -0.5, 0.7))) -
                 2.0 * mean_norm(rule, Vec3(0.3, -0.5, 0.7))) < 1e-12);

  const RayDirection iso{iso_alpha(), iso_beta()};
  check("tstate: Werner threshold 1/2",
        std::abs(tstate_boundary_radius(iso, rule) / std::sqrt(3.0) - 0.5) < 1e-8);

  check("mapped: reduces to tstate at a=0",
        std::abs(mapped_boundary_radius(0.0, iso, rule).r - tstate_boundary_radius(iso, rule)) <
            1e-9);
  {
    const auto sample = mapped_boundary_radius(0.3, iso, rule);
    const double xi = displaced_werner_xi(0.3);
    check("mapped: displaced-Werner closed form at a=0.3",
          std::abs(sample.r / std::sqrt(3.0) - xi) / xi < 1e-6 &&
              std::abs(sample.u_star - sample.v_star) < 1e-5);
  }

  {
    std::mt19937_64 rng(20260811);
    bool ok = true;
    double worst = 0.0;
    for (int trial = 0; trial < 20 && ok; ++trial) {
      const BlochState s = random_physical_state(rng);
      const QubitChannel ch = extremal_map(random_extremal_params(rng));
      const Vec3 axis = random_unit_vector(rng);
      const Assemblage direct = assemblage(apply_channel_A(ch, s), axis);
      const KrausSet ks = kraus_operators(ch);
      const Mat2c proj_p = 0.5 * (Mat2c::Identity() + axis[0] * pauli()[0] +
                                  axis[1] * pauli()[1] + axis[2] * pauli()[2]);
      const Mat2c proj_m = Mat2c::Identity() - proj_p;
      Mat2c e_p = Mat2c::Zero(), e_m = Mat2c::Zero();
      for (const Mat2c& k : ks.ops) {
        e_p += k.adjoint() * proj_p * k;
        e_m += k.adjoint() * proj_m * k;
      }
      const Mat4c rho = density_matrix(s);
      auto povm_member = [&](const Mat2c& e) {
        return Mat2c(partial_trace_a(kron(e, Mat2c::Identity()) * rho));
      };
      const double err = std::max((povm_member(e_p) - direct.plus).cwiseAbs().maxCoeff(),
                                  (povm_member(e_m) - direct.minus).cwiseAbs().maxCoeff());
      worst = std::max(worst, err);
      ok = err < 1e-10;
    }
    check("channels: assemblage equals transformed-POVM assemblage",
          ok, "worst deviation " + format_double(worst));
  }

  {
    bool all_cp = true;
    for (int i = 0; i < 10 && all_cp; ++i)
      for (int j = 0; j < 10 && all_cp; ++j)
        all_cp = is_cptp(
            extremal_map({2 * pi * i / 10, pi * j / 10, {0, 1, 2}}), 1e-10);
    check("channels: extremal family is CPTP", all_cp);
  }

  {
    const RayDirection dir{iso_alpha(), iso_beta()};
    const double r_ppt =
        boundary_radius_along_ray([&](const CanonicalState& s) {
          const Mat4c rho = density_matrix(s.to_bloch());
          return min_eigenvalue(rho) >= -1e-9 &&
                 min_eigenvalue(partial_transpose_b(rho)) >= -1e-9;
        }, 0.0, dir, 2.0, 1e-8);
    check("regions: Werner PPT threshold 1/3",
          std::abs(r_ppt / std::sqrt(3.0) - 1.0 / 3.0) < 1e-6);
  }

  {
    std::vector<Vec2> pts{{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0.5, 0.5}};
    const auto hull = convex_hull_2d(pts);
    check("regions: hull of square + center has 4 vertices", hull.size() == 4);
  }

  {
    std::mt19937_64 rng(7);
    bool ok = true;
    for (int trial = 0; trial < 10 && ok; ++trial) {
      const BlochState s = random_physical_state(rng);
      if (s.b.norm() > 0.95) continue;
      const auto [canonical, record] = canonical_form(s);
      const Mat2c rho_b = partial_trace_a(density_matrix(canonical.to_bloch()));
      ok = (rho_b - 0.5 * Mat2c::Identity()).cwiseAbs().maxCoeff() < 1e-10;
    }
    check("bloch: canonical form leaves Bob maximally mixed", ok);
  }

  out << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace detail

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Non-steerability boundaries for two-qubit states"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  int order = kDefaultOrder;
  double tol = kDefaultTol;
  std::string out_path;
  std::string format;

  // classify
  auto* cmd_classify = app.add_subcommand(
      "classify", "Classify a state and print all border distances along its ray");
  detail::StateFlags classify_state;
  detail::add_state_flags(cmd_classify, classify_state);
  bool no_hull = false;
  int hull_resolution = 32;
  cmd_classify->add_option("--order", order, "quadrature order");
  cmd_classify->add_option("--tol", tol, "eigenvalue/criterion tolerance");
  cmd_classify->add_flag("--no-hull", no_hull, "skip the hull certificate");
  cmd_classify->add_option("--hull-resolution", hull_resolution, "hull quarter-sweep rays");
  std::string classify_format = "text";
  cmd_classify->add_option("--format", classify_format, "text | json")
      ->check(CLI::IsMember({"text", "json"}));
  cmd_classify->add_option("--out", out_path, "write to file instead of stdout");

  // boundary
  auto* cmd_boundary = app.add_subcommand("boundary", "Boundary radius evaluations");
  cmd_boundary->require_subcommand(1);
  double alpha = detail::iso_alpha();
  double beta = detail::iso_beta();
  double bloch_a = 0.0;

  auto* cmd_tstate = cmd_boundary->add_subcommand(
      "tstate",
      "T-state boundary along a ray; prints boundary_scale = largest |T entry| on the "
      "boundary (Werner threshold on the isotropic ray) and the Euclidean radius");
  cmd_tstate->add_option("--alpha", alpha, "polar angle of the T-space ray");
  cmd_tstate->add_option("--beta", beta, "azimuthal angle of the T-space ray");
  cmd_tstate->add_option("--order", order, "quadrature order");
  cmd_tstate->add_option("--out", out_path, "write to file instead of stdout");

  auto* cmd_mapped = cmd_boundary->add_subcommand(
      "mapped", "Mapped non-steerability boundary radius with optimizer angles");
  cmd_mapped->add_option("--a", bloch_a, "Alice Bloch length along z")->required();
  cmd_mapped->add_option("--alpha", alpha, "polar angle of the T-space ray");
  cmd_mapped->add_option("--beta", beta, "azimuthal angle of the T-space ray");
  cmd_mapped->add_option("--order", order, "quadrature order");
  cmd_mapped->add_option("--out", out_path, "write to file instead of stdout");

  auto* cmd_dw = cmd_boundary->add_subcommand(
      "displaced-werner", "Closed-form displaced-Werner boundary xi(a)");
  cmd_dw->add_option("--a", bloch_a, "Alice Bloch length along z")->required();
  cmd_dw->add_option("--out", out_path, "write to file instead of stdout");

  auto* cmd_degen = cmd_boundary->add_subcommand(
      "degenerate-t",
      "Degenerate (t1=t2) closed form audited against the numeric pipeline");
  double degen_alpha = 2.0;
  int degen_grid = 0;
  double degen_beta = std::numbers::pi / 4;
  cmd_degen->add_option("--a", bloch_a, "Alice Bloch length along z")->required();
  cmd_degen->add_option("--alpha", degen_alpha, "polar angle (single evaluation)");
  cmd_degen->add_option("--grid", degen_grid, "audit N alpha values in (pi/2, pi)");
  cmd_degen->add_option("--beta", degen_beta, "azimuth of the numeric reference direction");
  cmd_degen->add_option("--order", order, "quadrature order");
  std::string degen_format = "csv";
  cmd_degen->add_option("--format", degen_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd_degen->add_option("--out", out_path, "write to file instead of stdout");

  // channel
  auto* cmd_channel = app.add_subcommand("channel", "Extremal channel inspection");
  cmd_channel->require_subcommand(1);
  double ch_u = 0.0, ch_v = 0.0;
  std::vector<int> ch_perm;
  auto add_channel_flags = [&](CLI::App* c) {
    c->add_option("--u", ch_u, "extremal angle u")->required();
    c->add_option("--v", ch_v, "extremal angle v")->required();
    c->add_option("--perm", ch_perm, "index permutation, e.g. --perm 2 1 0")->expected(3);
    c->add_option("--out", out_path, "write to file instead of stdout");
  };
  auto* cmd_check = cmd_channel->add_subcommand("check", "CPTP test via the Choi matrix");
  add_channel_flags(cmd_check);
  auto* cmd_kraus = cmd_channel->add_subcommand("kraus", "Kraus operators of the channel");
  add_channel_flags(cmd_kraus);
  auto* cmd_apply =
      cmd_channel->add_subcommand("apply", "Apply the channel on Alice's side of a state");
  add_channel_flags(cmd_apply);
  detail::StateFlags apply_state;
  detail::add_state_flags(cmd_apply, apply_state);

  // figure
  auto* cmd_figure = app.add_subcommand("figure", "Export slice tables (fig2, fig3a, fig3b)");
  std::string which;
  cmd_figure->add_option("which", which, "fig2 | fig3a | fig3b")
      ->required()
      ->check(CLI::IsMember({"fig2", "fig3a", "fig3b"}));
  double fig_a = -1.0;
  double fig_ratio = -1.0;
  int resolution = 256;
  std::string fig_format = "csv";
  cmd_figure->add_option("--a", fig_a, "Alice Bloch length (fig3 slices)");
  cmd_figure->add_option("--ratio", fig_ratio, "t2'/t1' ratio (fig3 slices)");
  cmd_figure->add_option("--resolution", resolution, "rays per slice (>= 16)");
  cmd_figure->add_option("--order", order, "quadrature order");
  cmd_figure->add_option("--tol", tol, "eigenvalue/criterion tolerance");
  cmd_figure->add_option("--format", fig_format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));
  cmd_figure->add_option("--out", out_path, "write to file instead of stdout");

  // selftest
  auto* cmd_selftest =
      app.add_subcommand("selftest", "Run the invariant suite at reduced resolution");
  int selftest_order = 32;
  cmd_selftest->add_option("--order", selftest_order, "quadrature order for the selftest");

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    err << app.help();
    return 2;
  }

  try {
    if (*cmd_classify) {
      detail::Sink sink(out, out_path);
      return detail::run_classify(*sink.os, classify_state, order, tol, !no_hull,
                                  hull_resolution, classify_format);
    }
    if (*cmd_tstate) {
      detail::Sink sink(out, out_path);
      const SphereRule rule = build_sphere_rule(order);
      const RayDirection dir{alpha, beta};
      const double r = tstate_boundary_radius(dir, rule);
      const double scale = r * dir.unit().cwiseAbs().maxCoeff();
      *sink.os << "boundary_scale=" << format_double(scale) << "\n";
      *sink.os << "r_euclidean=" << format_double(r) << "\n";
      *sink.os << "alpha=" << format_double(alpha) << "\n";
      *sink.os << "beta=" << format_double(beta) << "\n";
      *sink.os << "order=" << order << "\n";
      return 0;
    }
    if (*cmd_mapped) {
      detail::Sink sink(out, out_path);
      const SphereRule rule = build_sphere_rule(order);
      const auto sample = mapped_boundary_radius(bloch_a, RayDirection{alpha, beta}, rule);
      *sink.os << "r=" << format_double(sample.r) << "\n";
      *sink.os << "u_star=" << format_double(sample.u_star) << "\n";
      *sink.os << "v_star=" << format_double(sample.v_star) << "\n";
      *sink.os << "converged=" << (sample.converged ? 1 : 0) << "\n";
      return sample.converged ? 0 : 3;
    }
    if (*cmd_dw) {
      detail::Sink sink(out, out_path);
      *sink.os << "xi=" << format_double(displaced_werner_xi(bloch_a)) << "\n";
      return 0;
    }
    if (*cmd_degen) {
      detail::Sink sink(out, out_path);
      return detail::run_degenerate_t(*sink.os, bloch_a, degen_alpha, degen_grid, order,
                                      degen_beta, degen_format);
    }
    if (*cmd_check || *cmd_kraus || *cmd_apply) {
      detail::Sink sink(out, out_path);
      const QubitChannel ch = extremal_map({ch_u, ch_v, detail::parse_perm(ch_perm)});
      if (*cmd_check) {
        const double min_eig = min_eigenvalue(choi_matrix(ch));
        *sink.os << "cptp=" << (is_cptp(ch, 1e-10) ? 1 : 0) << "\n";
        *sink.os << "choi_min_eig=" << format_double(min_eig) << "\n";
        *sink.os << "m=" << detail::fmt_vec(ch.m) << "\n";
        *sink.os << "lambda=" << detail::fmt_vec(ch.lambda) << "\n";
        return 0;
      }
      if (*cmd_kraus) {
        const KrausSet ks = kraus_operators(ch);
        Mat2c tp = Mat2c::Zero();
        for (const Mat2c& k : ks.ops) tp += k.adjoint() * k;
        *sink.os << "count=" << ks.ops.size() << "\n";
        for (std::size_t i = 0; i < ks.ops.size(); ++i) {
          *sink.os << "k" << i << "=";
          for (int r = 0; r < 2; ++r)
            for (int c = 0; c < 2; ++c)
              *sink.os << "(" << format_double(ks.ops[i](r, c).real()) << ","
                       << format_double(ks.ops[i](r, c).imag()) << ")"
                       << (r == 1 && c == 1 ? "" : ";");
          *sink.os << "\n";
        }
        *sink.os << "tp_defect="
                 << format_double((tp - Mat2c::Identity()).cwiseAbs().maxCoeff()) << "\n";
        return 0;
      }
      const BlochState mapped = apply_channel_A(ch, detail::load_state(apply_state));
      *sink.os << "a_out=" << detail::fmt_vec(mapped.a) << "\n";
      *sink.os << "b_out=" << detail::fmt_vec(mapped.b) << "\n";
      for (int r = 0; r < 3; ++r)
        *sink.os << "t_row" << r + 1 << "=" << detail::fmt_vec(mapped.T.row(r)) << "\n";
      return 0;
    }
    if (*cmd_figure) {
      detail::Sink sink(out, out_path);
      SliceSpec spec = which == "fig2" ? fig2_spec()
                       : which == "fig3a" ? fig3a_spec()
                                          : fig3b_spec();
      if (fig_a >= 0.0) spec.a = fig_a;
      if (fig_ratio > 0.0) spec.ratio = fig_ratio;
      spec.resolution = resolution;
      spec.order = order;
      spec.tol = tol;
      const SliceTable table = figure_slice(spec);
      if (fig_format == "json")
        write_json(*sink.os, table);
      else
        write_csv(*sink.os, table);
      return 0;
    }
    if (*cmd_selftest) {
      return detail::run_selftest(out, selftest_order);
    }
  } catch (const invalid_input& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(std::move(args), out, err);
}

}  // namespace qsteer::cli
