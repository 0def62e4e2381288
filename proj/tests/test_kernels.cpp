#include <doctest.h>

#include <cstring>
#include <omp.h>

#include "bmf/kernels.hpp"
#include "helpers.hpp"

using namespace bmf;

namespace {

std::vector<cplx> random_vec(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  std::vector<cplx> v(n);
  for (auto& z : v) z = cplx(d(rng), d(rng));
  return v;
}

bool bitwise_equal(std::span<const cplx> a, std::span<const cplx> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(cplx)) == 0;
}

}  // namespace

TEST_CASE("multiply") {
  auto v = random_vec(10000, 1);
  const auto f = random_vec(10000, 2);
  auto w = v;
  kernels::serial::multiply(v, f);
  kernels::omp::multiply(w, f);
  CHECK(bitwise_equal(v, w));
}

TEST_CASE("squared norm: serial and OpenMP agree bit for bit, and match a naive sum") {
  for (std::size_t n : {1u, 4095u, 4096u, 4097u, 50000u}) {
    const auto v = random_vec(n, static_cast<unsigned>(n));
    const double s = kernels::serial::squared_norm(v);
    double naive = 0.0;
    for (auto z : v) naive += std::norm(z);
    CHECK(s == doctest::Approx(naive).epsilon(1e-12));
    for (int t : {1, 2, 3, 8}) {
      omp_set_num_threads(t);
      CHECK(kernels::omp::squared_norm(v) == s);
    }
  }
  omp_set_num_threads(1);
}

TEST_CASE("axis density") {
  const std::size_t outer = 6, m = 8, inner = 12;
  const auto psi = random_vec(outer * m * inner, 3);
  std::vector<double> a(m), b(m);
  kernels::serial::axis_density(psi, outer, m, inner, a);
  omp_set_num_threads(4);
  kernels::omp::axis_density(psi, outer, m, inner, b);
  omp_set_num_threads(1);
  CHECK(a == b);
  for (std::size_t k = 0; k < m; ++k) {
    double s = 0.0;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t i = 0; i < inner; ++i) s += std::norm(psi[(o * m + k) * inner + i]);
    CHECK(a[k] == doctest::Approx(s).epsilon(1e-13));
  }
}

TEST_CASE("separable update") {
  const std::size_t N = 3, m = 8;
  const auto psi0 = random_vec(m * m * m, 4);
  const auto c = random_vec(N * m, 5);
  auto a = psi0, b = psi0;
  kernels::serial::separable_update(a, N, m, c);
  omp_set_num_threads(3);
  kernels::omp::separable_update(b, N, m, c);
  omp_set_num_threads(1);
  CHECK(bitwise_equal(a, b));
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y)
      for (std::size_t z = 0; z < m; ++z) {
        const std::size_t f = (x * m + y) * m + z;
        const cplx expect = psi0[f] * (1.0 + c[x] + c[m + y] + c[2 * m + z]);
        CHECK(std::abs(a[f] - expect) < 1e-12);
      }
}

TEST_CASE("first marginal") {
  const std::size_t m = 8, rest = 300;
  const auto psi = random_vec(m * rest, 6);
  const Matrix a = kernels::serial::first_marginal(psi, m, rest);
  omp_set_num_threads(4);
  const Matrix b = kernels::omp::first_marginal(psi, m, rest);
  omp_set_num_threads(1);
  CHECK(bitwise_equal(a.data(), b.data()));
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y < m; ++y) {
      cplx s = 0.0;
      for (std::size_t r = 0; r < rest; ++r) s += psi[x * rest + r] * std::conj(psi[y * rest + r]);
      CHECK(std::abs(a(x, y) - s) < 1e-10);
    }
  CHECK(hermiticity_error(a) < 1e-12);
}
