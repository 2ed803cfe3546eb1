#pragma once

// Qubit CPTP maps in the translation + diagonal-contraction representation,
// the two-angle extremal family, Choi/Kraus conversions, and the induced
// affine action on two-qubit states when applied to Alice's side.

#include <array>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "qsteer/bloch.hpp"
#include "qsteer/errors.hpp"

namespace qsteer {

using Perm3 = std::array<int, 3>;

inline void check_perm(const Perm3& p) {
  std::array<bool, 3> seen{false, false, false};
  for (int i : p) {
    if (i < 0 || i > 2 || seen[i]) throw invalid_input("perm must be a permutation of {0,1,2}");
    seen[i] = true;
  }
}

// Channel in the unital-block form: Bloch action x -> m + diag(lambda) x.
// m and lambda are stored in the lab frame (the permutation from the
// two-angle family has already been applied); perm records which relabeling
// produced them.
struct QubitChannel {
  Vec3 m = Vec3::Zero();
  Vec3 lambda = Vec3::Ones();
  Perm3 perm{0, 1, 2};
};

struct ExtremalParams {
  double u = 0.0;  // [0, 2pi)
  double v = 0.0;  // [0, pi)
  Perm3 perm{0, 1, 2};
};

struct KrausSet {
  std::vector<Mat2c> ops;
};

// General affine Bloch action (composition leaves the diagonal family).
struct AffineAction {
  Vec3 m = Vec3::Zero();
  Mat3 linear = Mat3::Identity();
};

inline AffineAction to_affine(const QubitChannel& ch) {
  return AffineAction{ch.m, Mat3(ch.lambda.asDiagonal())};
}

// Closure of the extremal qubit CPTP maps: lambda = (cos u, cos v, cos u cos v),
// m = (0, 0, sin u sin v), relabeled by perm.
inline QubitChannel extremal_map(const ExtremalParams& p) {
  check_perm(p.perm);
  const double cu = std::cos(p.u), cv = std::cos(p.v);
  const Vec3 lambda0(cu, cv, cu * cv);
  const Vec3 m0(0.0, 0.0, std::sin(p.u) * std::sin(p.v));
  QubitChannel ch;
  ch.perm = p.perm;
  for (int i = 0; i < 3; ++i) {
    ch.lambda[p.perm[i]] = lambda0[i];
    ch.m[p.perm[i]] = m0[i];
  }
  return ch;
}

namespace detail {

// Choi state (Phi (x) I)|Omega><Omega| for the affine action (m, L):
// (1/4)[(I + m.sigma) (x) I + sum_ij L_ij sigma_i (x) sigma_j^T].
inline Mat4c choi_from_affine(const Vec3& m, const Mat3& L) {
  const auto& sigma = pauli();
  const Mat2c id = Mat2c::Identity();
  Mat2c phi_id = id;
  for (int i = 0; i < 3; ++i) phi_id += m[i] * sigma[i];
  Mat4c choi = kron(phi_id, id);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      if (L(i, j) == 0.0) continue;
      choi += L(i, j) * kron(sigma[i], sigma[j].transpose());
    }
  return 0.25 * choi;
}

}  // namespace detail

inline Mat4c choi_matrix(const QubitChannel& ch) {
  return detail::choi_from_affine(ch.m, Mat3(ch.lambda.asDiagonal()));
}

inline Mat4c choi_matrix(const AffineAction& act) {
  return detail::choi_from_affine(act.m, act.linear);
}

inline bool is_cptp(const QubitChannel& ch, double tol = 1e-10) {
  return min_eigenvalue(choi_matrix(ch)) >= -tol;
}

// Kraus operators from the eigendecomposition of the Choi matrix,
// discarding eigenvalues below 1e-12.
inline KrausSet kraus_operators(const QubitChannel& ch) {
  if (!is_cptp(ch, 1e-10))
    throw not_completely_positive("kraus_operators: channel is not completely positive");
  Eigen::SelfAdjointEigenSolver<Mat4c> es(choi_matrix(ch));
  KrausSet ks;
  for (int k = 0; k < 4; ++k) {
    const double w = es.eigenvalues()(k);
    if (w <= 1e-12) continue;
    const Eigen::Vector4cd v = es.eigenvectors().col(k);
    Mat2c a;
    // C = (1/2) sum_k vec(A_k) vec(A_k)^dagger with vec index r*2 + s.
    const double scale = std::sqrt(2.0 * w);
    a << scale * v(0), scale * v(1), scale * v(2), scale * v(3);
    ks.ops.push_back(a);
  }
  return ks;
}

// Channel action on a single-qubit operator M = w0 I + w.sigma:
// Phi(M) = w0 I + (w0 m + diag(lambda) w).sigma.
inline Mat2c apply_to_qubit(const QubitChannel& ch, const Mat2c& op) {
  const auto& sigma = pauli();
  const complexd w0 = 0.5 * op.trace();
  Mat2c out = w0 * Mat2c::Identity();
  for (int i = 0; i < 3; ++i) {
    const complexd wi = 0.5 * (op * sigma[i]).trace();
    out += (w0 * ch.m[i] + ch.lambda[i] * wi) * sigma[i];
  }
  return out;
}

inline BlochState apply_channel_A(const QubitChannel& ch, const BlochState& s) {
  BlochState out;
  out.a = ch.m + ch.lambda.asDiagonal() * s.a;
  out.b = s.b;
  out.T = ch.m * s.b.transpose() + Mat3(ch.lambda.asDiagonal()) * s.T;
  return out;
}

inline BlochState apply_channel_A(const AffineAction& act, const BlochState& s) {
  BlochState out;
  out.a = act.m + act.linear * s.a;
  out.b = s.b;
  out.T = act.m * s.b.transpose() + act.linear * s.T;
  return out;
}

// Composition ch2 after ch1. The result generally leaves the diagonal
// family, so it is returned as a full affine action.
inline AffineAction compose(const AffineAction& ch2, const AffineAction& ch1) {
  return AffineAction{ch2.m + ch2.linear * ch1.m, ch2.linear * ch1.linear};
}

inline AffineAction compose(const QubitChannel& ch2, const QubitChannel& ch1) {
  return compose(to_affine(ch2), to_affine(ch1));
}

}  // namespace qsteer
