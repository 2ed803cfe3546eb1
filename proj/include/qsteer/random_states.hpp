#pragma once

// Seeded generators for random states, channels and directions, used by the
// selftest command and the property tests.

#include <numbers>
#include <random>

#include "qsteer/bloch.hpp"
#include "qsteer/channels.hpp"

namespace qsteer {

inline Vec3 random_unit_vector(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Vec3 v(n(rng), n(rng), n(rng));
  while (v.norm() < 1e-6) v = Vec3(n(rng), n(rng), n(rng));
  return v.normalized();
}

// Ginibre ensemble: rho = G G^dagger / tr.
inline Mat4c random_density_matrix(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat4c g;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) g(i, j) = complexd(n(rng), n(rng));
  Mat4c rho = g * g.adjoint();
  return rho / rho.trace();
}

inline BlochState random_physical_state(std::mt19937_64& rng) {
  return bloch_decompose(random_density_matrix(rng));
}

inline ExtremalParams random_extremal_params(std::mt19937_64& rng, bool with_perm = true) {
  std::uniform_real_distribution<double> uu(0.0, 2.0 * std::numbers::pi);
  std::uniform_real_distribution<double> uv(0.0, std::numbers::pi);
  ExtremalParams p;
  p.u = uu(rng);
  p.v = uv(rng);
  if (with_perm) {
    static constexpr std::array<Perm3, 6> kPerms{
        Perm3{0, 1, 2}, Perm3{0, 2, 1}, Perm3{1, 0, 2},
        Perm3{1, 2, 0}, Perm3{2, 0, 1}, Perm3{2, 1, 0}};
    std::uniform_int_distribution<int> pick(0, 5);
    p.perm = kPerms[pick(rng)];
  }
  return p;
}

// Proper rotation from the QR decomposition of a Gaussian matrix.
inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Mat3 g;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) g(i, j) = n(rng);
  Eigen::HouseholderQR<Mat3> qr(g);
  Mat3 q = qr.householderQ();
  if (q.determinant() < 0) q.col(0) *= -1.0;
  return q;
}

}  // namespace qsteer
