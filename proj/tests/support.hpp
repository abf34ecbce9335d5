#ifndef GSDA_TESTS_SUPPORT_HPP
#define GSDA_TESTS_SUPPORT_HPP

#include "gsda/types.hpp"

#include <cstdint>
#include <random>

namespace gsda::test {

/// i.i.d. uniform points in [-1, 1]^3.
inline Points random_cloud(Eigen::Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Points p(n, 3);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < 3; ++c) p(i, c) = u(rng);
  return p;
}

inline Eigen::Matrix3d rotation_about(const Eigen::Vector3d& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

/// Relative error |a - b| / max(|a|, |b|, floor).
inline double rel_err(double a, double b, double floor = 1e-8) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace gsda::test

#endif  // GSDA_TESTS_SUPPORT_HPP
