#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bmf/fft.hpp"
#include "bmf/grid.hpp"
#include "helpers.hpp"

using namespace bmf;
using bmf::test::random_wave;

TEST_CASE("grid validation and FFT-order coordinates") {
  CHECK_THROWS(GridSpec(1, 6, 10.0));
  CHECK_THROWS(GridSpec(1, 2, 10.0));
  CHECK_THROWS(GridSpec(4, 8, 10.0));
  CHECK_THROWS(GridSpec(1, 8, -1.0));
  CHECK_THROWS(GridSpec(3, 1024, 10.0, 1 << 20));
  const GridSpec g(1, 8, 8.0);
  CHECK(g.coordinate(0) == 0.0);
  CHECK(g.coordinate(3) == doctest::Approx(3.0));
  CHECK(g.coordinate(4) == doctest::Approx(-4.0));
  CHECK(g.coordinate(7) == doctest::Approx(-1.0));
  CHECK(g.cell_volume() == doctest::Approx(1.0));
  const GridSpec g3(3, 4, 2.0);
  CHECK(g3.size() == 64);
  for (std::size_t f = 0; f < g3.size(); ++f) CHECK(g3.ravel(g3.unravel(f)) == f);
  CHECK(g.wrap(4.5) == doctest::Approx(-3.5));
}

TEST_CASE("inner product against a naive sum") {
  const GridSpec g(1, 8, 5.0);
  const auto u = random_wave(g, 1, false), v = random_wave(g, 2, false);
  double s = 0.0;
  for (std::size_t i = 0; i < 8; ++i)
    s += u.values[i].real() * v.values[i].real() + u.values[i].imag() * v.values[i].imag();
  s *= 5.0 / 8.0;
  CHECK(inner_l2(u, v) == doctest::Approx(s).epsilon(1e-12));
  CHECK(inner_l2(u, v) == doctest::Approx(inner_l2(v, u)).epsilon(1e-14));

  const auto w = gaussian_packet(GridSpec(1, 64, 20.0), 0.0, 1.0);
  CHECK(inner_l2(w, w) == doctest::Approx(1.0).epsilon(1e-12));
  WaveFunction iw = w;
  for (auto& z : iw.values) z *= cplx(0.0, 1.0);
  CHECK(std::abs(inner_l2(w, iw)) < 1e-12);
  CHECK_THROWS(inner_l2(w, u));
}

TEST_CASE("H1 norm of constants, plane waves and of a Gaussian packet") {
  const GridSpec g(1, 32, 4.0);
  WaveFunction c(g);
  for (auto& z : c.values) z = cplx(0.5, 0.0);
  CHECK(h1_norm(c) == doctest::Approx(0.5 * std::sqrt(4.0)).epsilon(1e-12));

  const double k = 2.0 * std::numbers::pi * 3.0 / 4.0;
  WaveFunction pw(g);
  for (std::size_t i = 0; i < g.size(); ++i) pw.values[i] = std::polar(1.0, k * g.coordinate(i));
  normalize(pw);
  CHECK(h1_norm(pw) == doctest::Approx(std::sqrt(1.0 + k * k)).epsilon(1e-10));

  const GridSpec fine(1, 256, 20.0);
  const auto u = gaussian_packet(fine, 0.5, 1.0, 2.0);
  // |grad u|^2 = p^2 + 1/(4 w^2) for a packet of density width w and momentum p
  CHECK(gradient_l2_norm(u) == doctest::Approx(std::sqrt(4.0 + 0.25)).epsilon(1e-10));

}

TEST_CASE("spectral derivative of a resolved mode") {
  const GridSpec g(2, 16, 6.0);
  WaveFunction u(g);
  const double k = 2.0 * std::numbers::pi * 2.0 / 6.0;
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.unravel(f);
    u.values[f] = std::sin(k * g.coordinate(idx[1]));
  }
  const auto d0 = spectral_derivative(u, 0);
  const auto d1 = spectral_derivative(u, 1);
  for (std::size_t f = 0; f < g.size(); ++f) {
    const auto idx = g.unravel(f);
    CHECK(std::abs(d0.values[f]) < 1e-10);
    CHECK(std::abs(d1.values[f] - k * std::cos(k * g.coordinate(idx[1]))) < 1e-10);
  }
}

TEST_CASE("free propagation is unitary and exact on plane waves") {
  const GridSpec g(1, 32, 10.0);
  const auto u = random_wave(g, 3);
  const auto v = free_propagate(u, 0.37);
  CHECK(l2_norm(v) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bmf::test::max_diff(free_propagate(v, -0.37), u) < 1e-12);
  CHECK(bmf::test::max_diff(free_propagate(free_propagate(u, 0.1), 0.27), v) < 1e-12);

  const double k = 2.0 * std::numbers::pi * 2.0 / 10.0;
  WaveFunction pw(g);
  for (std::size_t i = 0; i < g.size(); ++i) pw.values[i] = std::polar(1.0, k * g.coordinate(i));
  const auto p = free_propagate(pw, 0.5);
  for (std::size_t i = 0; i < g.size(); ++i)
    CHECK(std::abs(p.values[i] - pw.values[i] * std::polar(1.0, -k * k * 0.5)) < 1e-12);
  CHECK(std::abs(h1_norm(p) - h1_norm(pw)) < 1e-10);
}

TEST_CASE("convolution against the O(n^2) sum") {
  const GridSpec g(1, 16, 7.0);
  RealGridFunction V(g), xi(g);
  for (std::size_t i = 0; i < 16; ++i) {
    V.values[i] = std::exp(-g.coordinate(i) * g.coordinate(i));
    xi.values[i] = 1.0 + std::sin(static_cast<double>(i));
  }
  const auto c = convolve_potential(V, xi);
  for (std::size_t i = 0; i < 16; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < 16; ++j) s += V.values[(i + 16 - j) % 16] * xi.values[j];
    CHECK(c.values[i] == doctest::Approx(s * g.spacing()).epsilon(1e-12));
  }

  const GridSpec g2(2, 8, 4.0);
  RealGridFunction V2(g2), x2(g2);
  for (std::size_t f = 0; f < g2.size(); ++f) {
    V2.values[f] = std::cos(0.3 * static_cast<double>(f));
    x2.values[f] = static_cast<double>(f % 5);
  }
  const auto c2 = convolve_potential(V2, x2);
  for (std::size_t f = 0; f < g2.size(); ++f) {
    const auto a = g2.unravel(f);
    double s = 0.0;
    for (std::size_t q = 0; q < g2.size(); ++q) {
      const auto b = g2.unravel(q);
      s += V2.values[g2.ravel({(a[0] + 8 - b[0]) % 8, (a[1] + 8 - b[1]) % 8, 0})] * x2.values[q];
    }
    CHECK(c2.values[f] == doctest::Approx(s * g2.cell_volume()).epsilon(1e-12));
  }
}

TEST_CASE("input validation") {
  const GridSpec g(1, 8, 5.0);
  auto u = random_wave(g, 4);
  CHECK_NOTHROW(require_normalized(u));
  u.values[0] *= 2.0;
  CHECK_THROWS(require_normalized(u));
  u.values[1] = cplx(NAN, 0.0);
  CHECK_FALSE(u.all_finite());
  RealGridFunction d(g);
  for (auto& v : d.values) v = 1.0 / 5.0;
  CHECK_NOTHROW(require_density(d));
  d.values[0] = -0.1;
  CHECK_THROWS(require_density(d));
  WaveFunction z(g);
  CHECK_THROWS(normalize(z));
}

TEST_CASE("fft round trip and squared wavenumbers") {
  const auto& plan = fft_plan(2, 8);
  auto u = random_wave(GridSpec(2, 8, 3.0), 5, false);
  auto v = u.values;
  plan.forward(v);
  plan.backward(v);
  for (std::size_t i = 0; i < v.size(); ++i) CHECK(std::abs(v[i] / 64.0 - u.values[i]) < 1e-13);
  const auto k2 = squared_wavenumbers(8, 3.0, 2);
  const double k1 = 2.0 * std::numbers::pi / 3.0;
  CHECK(k2[0] == 0.0);
  CHECK(k2[1] == doctest::Approx(k1 * k1));
  CHECK(k2[8 * 7 + 4] == doctest::Approx(k1 * k1 * (1.0 + 16.0)));
}
