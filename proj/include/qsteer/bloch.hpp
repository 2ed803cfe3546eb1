#pragma once

// Two-qubit states in the Pauli (Bloch) representation: density matrices,
// physicality and PPT separability tests, reduction to canonical form
// (Bob maximally mixed, diagonal correlation matrix), and assemblages.

#include <array>
#include <cmath>
#include <complex>
#include <utility>

#include <Eigen/Dense>

#include "qsteer/errors.hpp"

namespace qsteer {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Mat2c = Eigen::Matrix2cd;
using Mat4c = Eigen::Matrix4cd;
using complexd = std::complex<double>;

inline constexpr double kDefaultTol = 1e-9;

inline const std::array<Mat2c, 3>& pauli() {
  static const std::array<Mat2c, 3> sigma = [] {
    std::array<Mat2c, 3> s;
    s[0] << 0, 1, 1, 0;
    s[1] << 0, complexd(0, -1), complexd(0, 1), 0;
    s[2] << 1, 0, 0, -1;
    return s;
  }();
  return sigma;
}

inline Mat4c kron(const Mat2c& x, const Mat2c& y) {
  Mat4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      out.block<2, 2>(2 * i, 2 * j) = x(i, j) * y;
  return out;
}

// State as (a, b, T): local Bloch vectors and the 3x3 correlation matrix.
struct BlochState {
  Vec3 a = Vec3::Zero();
  Vec3 b = Vec3::Zero();
  Mat3 T = Mat3::Zero();
};

// State with b = 0 and diagonal T, stored as (a, t).
struct CanonicalState {
  Vec3 a = Vec3::Zero();
  Vec3 t = Vec3::Zero();

  BlochState to_bloch() const { return BlochState{a, Vec3::Zero(), t.asDiagonal()}; }
};

// Audit trail for canonical_form: canonical state is obtained by applying
// the (unnormalized) filter on Bob, dividing by filter_norm, and rotating
// Bloch space by rot_a on Alice and rot_b on Bob
// (a -> rot_a^T a, b -> rot_b^T b, T -> rot_a^T T rot_b).
struct TransformRecord {
  Mat2c filter = Mat2c::Identity();
  double filter_norm = 1.0;
  Mat3 rot_a = Mat3::Identity();
  Mat3 rot_b = Mat3::Identity();
  bool identity = true;
};

// Bob's unnormalized conditional states for a two-outcome projective
// measurement of Alice along `axis`.
struct Assemblage {
  Mat2c plus;
  Mat2c minus;
  Vec3 axis;
};

inline Mat4c density_matrix(const BlochState& s) {
  const auto& sigma = pauli();
  const Mat2c id = Mat2c::Identity();
  Mat4c rho = kron(id, id);
  for (int i = 0; i < 3; ++i) {
    rho += s.a[i] * kron(sigma[i], id);
    rho += s.b[i] * kron(id, sigma[i]);
    for (int j = 0; j < 3; ++j) rho += s.T(i, j) * kron(sigma[i], sigma[j]);
  }
  return 0.25 * rho;
}

inline BlochState bloch_decompose(const Mat4c& rho) {
  if (std::abs(rho.trace() - complexd(1.0, 0.0)) > 1e-10)
    throw invalid_input("bloch_decompose: density matrix trace is not 1");
  const auto& sigma = pauli();
  const Mat2c id = Mat2c::Identity();
  BlochState s;
  for (int i = 0; i < 3; ++i) {
    s.a[i] = (rho * kron(sigma[i], id)).trace().real();
    s.b[i] = (rho * kron(id, sigma[i])).trace().real();
    for (int j = 0; j < 3; ++j)
      s.T(i, j) = (rho * kron(sigma[i], sigma[j])).trace().real();
  }
  return s;
}

inline Mat2c partial_trace_a(const Mat4c& rho) {
  Mat2c out = Mat2c::Zero();
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l)
      for (int i = 0; i < 2; ++i) out(k, l) += rho(2 * i + k, 2 * i + l);
  return out;
}

inline Mat2c partial_trace_b(const Mat4c& rho) {
  Mat2c out = Mat2c::Zero();
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) out(i, j) += rho(2 * i + k, 2 * j + k);
  return out;
}

// Transpose of Bob's indices only.
inline Mat4c partial_transpose_b(const Mat4c& rho) {
  Mat4c out;
  for (int ia = 0; ia < 2; ++ia)
    for (int ib = 0; ib < 2; ++ib)
      for (int ja = 0; ja < 2; ++ja)
        for (int jb = 0; jb < 2; ++jb)
          out(2 * ia + ib, 2 * ja + jb) = rho(2 * ia + jb, 2 * ja + ib);
  return out;
}

inline double min_eigenvalue(const Mat4c& h) {
  Eigen::SelfAdjointEigenSolver<Mat4c> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline bool is_physical(const BlochState& s, double tol = kDefaultTol) {
  return min_eigenvalue(density_matrix(s)) >= -tol;
}

// PPT test, exact for two qubits. Requires a physical input.
inline bool is_separable_ppt(const BlochState& s, double tol = kDefaultTol) {
  if (!is_physical(s, tol))
    throw invalid_input("is_separable_ppt: state is not physical");
  return min_eigenvalue(partial_transpose_b(density_matrix(s))) >= -tol;
}

// Local filter on Bob followed by local rotations diagonalizing T.
// Output has b = 0 and diagonal T with |t1| >= |t2| >= |t3|; all entries
// non-negative except t3 < 0 when det T < 0 (det sign is preserved, ties
// order + before -). Steerability classification of the output applies to
// the input.
inline std::pair<CanonicalState, TransformRecord> canonical_form(const BlochState& s) {
  const Mat4c rho = density_matrix(s);
  const Mat2c rho_b = partial_trace_a(rho);

  Eigen::SelfAdjointEigenSolver<Mat2c> es(rho_b);
  if (es.eigenvalues()(0) < 1e-12)
    throw singular_marginal("canonical_form: Bob's reduced state is singular (|b| = 1)");
  const Mat2c inv_sqrt = es.operatorInverseSqrt();

  const Mat2c id = Mat2c::Identity();
  Mat4c filtered = kron(id, inv_sqrt) * rho * kron(id, inv_sqrt);
  const double norm = filtered.trace().real();
  filtered /= norm;

  const BlochState f = bloch_decompose(filtered);

  // Signed SVD with rotations restricted to det +1; the sign surplus lands
  // on the smallest singular value, which realizes the ordering convention
  // directly (JacobiSVD sorts singular values descending).
  Eigen::JacobiSVD<Mat3> svd(f.T, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 rot_a = svd.matrixU();
  Mat3 rot_b = svd.matrixV();
  Vec3 t = svd.singularValues();
  if (rot_a.determinant() < 0) {
    rot_a.col(2) *= -1.0;
    t[2] *= -1.0;
  }
  if (rot_b.determinant() < 0) {
    rot_b.col(2) *= -1.0;
    t[2] *= -1.0;
  }

  CanonicalState out;
  out.a = rot_a.transpose() * f.a;
  out.t = t;

  TransformRecord rec;
  rec.filter = inv_sqrt;
  rec.filter_norm = norm;
  rec.rot_a = rot_a;
  rec.rot_b = rot_b;
  rec.identity = (inv_sqrt - std::sqrt(2.0) * id).cwiseAbs().maxCoeff() < 1e-9 &&
                 (rot_a - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9 &&
                 (rot_b - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-9;
  return {out, rec};
}

inline Assemblage assemblage(const BlochState& s, const Vec3& axis) {
  if (std::abs(axis.norm() - 1.0) > 1e-12)
    throw invalid_input("assemblage: measurement axis must be a unit vector");
  const auto& sigma = pauli();
  const Mat2c id = Mat2c::Identity();
  // Tr_A[(Pi_{+-} (x) I) rho] = (1/4)[(1 +- axis.a) I + (b +- T^T axis).sigma]
  const Vec3 tb = s.T.transpose() * axis;
  Assemblage out;
  out.axis = axis;
  Mat2c plus = (1.0 + axis.dot(s.a)) * id;
  Mat2c minus = (1.0 - axis.dot(s.a)) * id;
  for (int i = 0; i < 3; ++i) {
    plus += (s.b[i] + tb[i]) * sigma[i];
    minus += (s.b[i] - tb[i]) * sigma[i];
  }
  out.plus = 0.25 * plus;
  out.minus = 0.25 * minus;
  return out;
}

}  // namespace qsteer
