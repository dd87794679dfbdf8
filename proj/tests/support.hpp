#pragma once

#include <random>

#include "nematic/sphere.hpp"

namespace nematic::testing {

inline HarmonicField random_field(int L, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  HarmonicField f(L);
  for (int l = 0; l <= L; ++l)
    for (int m = 0; m <= l; ++m) f(l, m) = cplx(nd(rng), m ? nd(rng) : 0.0);
  f.symmetrize();
  return f;
}

inline double max_abs_diff(const HarmonicField& a, const HarmonicField& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.coeffs.size(); ++i) d = std::max(d, std::abs(a.coeffs[i] - b.coeffs[i]));
  return d;
}

inline Mat3 random_traceless(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Mat3 k;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) k(i, j) = nd(rng);
  k -= k.trace() / 3.0 * Mat3::Identity();
  return k;
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Vec3 v(nd(rng), nd(rng), nd(rng));
  return v.normalized();
}

}  // namespace nematic::testing
