#pragma once

#include <random>

#include "bmf/grid.hpp"
#include "bmf/linalg.hpp"

namespace bmf::test {

inline WaveFunction random_wave(const GridSpec& g, unsigned seed, bool normalized = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  WaveFunction u(g);
  for (auto& z : u.values) z = cplx(n(rng), n(rng));
  if (normalized) normalize(u);
  return u;
}

inline Matrix random_matrix(std::size_t m, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Matrix a(m, m);
  for (auto& z : a.data()) z = cplx(n(rng), n(rng));
  return a;
}

inline double max_diff(const WaveFunction& a, const WaveFunction& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a.values[i] - b.values[i]));
  return d;
}

}  // namespace bmf::test
