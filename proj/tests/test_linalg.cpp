#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bmf/linalg.hpp"
#include "helpers.hpp"

using namespace bmf;
using bmf::test::random_matrix;

namespace {

// Cyclic Jacobi on the real symmetric embedding [[A, -B], [B, A]] of
// H = A + iB; every eigenvalue of H appears twice.
std::vector<double> jacobi_oracle(const Matrix& h) {
  const std::size_t m = h.rows(), n = 2 * m;
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      s[i * n + j] = s[(i + m) * n + j + m] = h(i, j).real();
      s[i * n + j + m] = -h(i, j).imag();
      s[(i + m) * n + j] = h(i, j).imag();
    }
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += s[p * n + q] * s[p * n + q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = s[p * n + q];
        if (std::abs(apq) < 1e-300) continue;
        const double theta = (s[q * n + q] - s[p * n + p]) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), sn = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = s[k * n + p], akq = s[k * n + q];
          s[k * n + p] = c * akp - sn * akq;
          s[k * n + q] = sn * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = s[p * n + k], aqk = s[q * n + k];
          s[p * n + k] = c * apk - sn * aqk;
          s[q * n + k] = sn * apk + c * aqk;
        }
      }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = s[i * n + i];
  std::sort(ev.begin(), ev.end());
  std::vector<double> out;
  for (std::size_t i = 0; i < n; i += 2) out.push_back(0.5 * (ev[i] + ev[i + 1]));
  return out;
}

Matrix random_unitary(std::size_t m, unsigned seed) {
  Matrix u = Matrix::identity(m);
  for (unsigned r = 0; r < 4; ++r) {
    const Matrix g = random_matrix(m, seed * 17 + r);
    std::vector<cplx> v(m);
    double n2 = 0.0;
    for (std::size_t i = 0; i < m; ++i) n2 += std::norm(v[i] = g(i, 0));
    Matrix h = Matrix::identity(m);
    h -= (2.0 / n2) * Matrix::outer(v, v);
    u = h * u;
  }
  return u;
}

}  // namespace

TEST_CASE("matrix basics") {
  const Matrix a = random_matrix(5, 1), b = random_matrix(5, 2);
  const Matrix ab = a * b;
  cplx s = 0.0;
  for (std::size_t k = 0; k < 5; ++k) s += a(2, k) * b(k, 3);
  CHECK(std::abs(ab(2, 3) - s) < 1e-13);
  CHECK(max_abs_diff(ab.adjoint(), b.adjoint() * a.adjoint()) < 1e-13);
  CHECK(hermiticity_error(hermitian_part(a)) == 0.0);
  CHECK(std::abs((a + b).trace() - a.trace() - b.trace()) < 1e-13);
  CHECK_THROWS(a * Matrix(3, 3));
}

TEST_CASE("Hermitian eigenvalues match the Jacobi oracle") {
  for (std::size_t m : {1u, 2u, 3u, 8u, 17u, 32u}) {
    const Matrix h = hermitian_part(random_matrix(m, static_cast<unsigned>(m)));
    const auto ev = hermitian_eigenvalues(h);
    const auto ref = jacobi_oracle(h);
    REQUIRE(ev.size() == m);
    for (std::size_t i = 0; i < m; ++i) CHECK(ev[i] == doctest::Approx(ref[i]).epsilon(1e-10).scale(1.0));
    double tr = 0.0;
    for (double v : ev) tr += v;
    CHECK(tr == doctest::Approx(h.trace().real()).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("eigenvalues of structured and graded matrices") {
  CHECK(hermitian_eigenvalues(Matrix(4, 4)) == std::vector<double>(4, 0.0));
  const auto id = hermitian_eigenvalues(Matrix::identity(6));
  for (double v : id) CHECK(v == doctest::Approx(1.0));

  // Known spectrum spread over thirty decades, hidden by a unitary.
  const std::size_t m = 48;
  const Matrix u = random_unitary(m, 3);
  Matrix d(m, m);
  std::vector<double> exact;
  for (std::size_t i = 0; i < m; ++i) {
    const double v = (i % 2 ? -1.0 : 1.0) * std::pow(10.0, -static_cast<double>(i) * 0.7);
    d(i, i) = v;
    exact.push_back(v);
  }
  std::sort(exact.begin(), exact.end());
  const auto ev = hermitian_eigenvalues(hermitian_part(u * d * u.adjoint()));
  for (std::size_t i = 0; i < m; ++i) CHECK(std::abs(ev[i] - exact[i]) < 1e-14);

  // Difference of two nearby pure states: rank two, many zero eigenvalues.
  std::vector<cplx> a(64), b(64);
  for (std::size_t i = 0; i < 64; ++i) {
    a[i] = std::polar(std::exp(-0.01 * double(i * i)), 0.1 * double(i));
    b[i] = a[i] * std::polar(1.0, 1e-3 * std::sin(double(i)));
  }
  double na = 0.0;
  for (auto z : a) na += std::norm(z);
  for (auto& z : a) z /= std::sqrt(na);
  for (auto& z : b) z /= std::sqrt(na);
  const Matrix diff = Matrix::outer(a, a) - Matrix::outer(b, b);
  const auto dv = hermitian_eigenvalues(diff);
  CHECK(std::abs(dv.front() + dv.back()) < 1e-12);  // traceless rank two
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < 64; ++i) overlap += std::conj(a[i]) * b[i];
  CHECK(hermitian_trace_norm(diff) == doctest::Approx(2.0 * std::sqrt(1.0 - std::norm(overlap))).epsilon(1e-8));
}

TEST_CASE("singular values and norms") {
  const Matrix a = random_matrix(6, 9);
  const auto sv = singular_values(a);
  const auto ev = jacobi_oracle(a.adjoint() * a);
  for (std::size_t i = 0; i < 6; ++i) CHECK(sv[i] == doctest::Approx(std::sqrt(ev[5 - i])).epsilon(1e-9));
  CHECK(operator_norm(a) == doctest::Approx(sv[0]));
  double tr = 0.0, hs = 0.0;
  for (double s : sv) {
    tr += s;
    hs += s * s;
  }
  CHECK(trace_norm(a) == doctest::Approx(tr));
  CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(hs)).epsilon(1e-12));
  CHECK(operator_norm(a) <= frobenius_norm(a));
  CHECK(frobenius_norm(a) <= trace_norm(a));

  Matrix diag(3, 3);
  diag(0, 0) = 2.0;
  diag(1, 1) = cplx(0.0, -3.0);
  CHECK(operator_norm(diag) == doctest::Approx(3.0));
  CHECK(trace_norm(diag) == doctest::Approx(5.0));
  const Matrix h = hermitian_part(random_matrix(7, 4));
  double s = 0.0;
  for (double v : jacobi_oracle(h)) s += std::abs(v);
  CHECK(hermitian_trace_norm(h) == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("eigensolver input validation") {
  CHECK_THROWS_AS(hermitian_eigenvalues(Matrix(2, 3)), std::invalid_argument);
  Matrix bad(2, 2);
  bad(1, 0) = cplx(NAN, 0.0);
  CHECK_THROWS_AS(hermitian_eigenvalues(bad), std::invalid_argument);
  CHECK_THROWS_AS(hermitian_eigenvalues(hermitian_part(random_matrix(20, 1)), 0), EigenSolverError);
}
