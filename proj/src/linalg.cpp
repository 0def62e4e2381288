#include "bmf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bmf {

Matrix Matrix::identity(std::size_t m) {
  Matrix out(m, m);
  for (std::size_t i = 0; i < m; ++i) out(i, i) = 1.0;
  return out;
}

Matrix Matrix::outer(std::span<const cplx> a, std::span<const cplx> b) {
  Matrix out(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out(i, j) = a[i] * std::conj(b[j]);
  return out;
}

Matrix Matrix::adjoint() const {
  Matrix out(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) out(j, i) = std::conj((*this)(i, j));
  return out;
}

cplx Matrix::trace() const {
  if (!square()) throw std::invalid_argument("trace of a non-square matrix");
  cplx s = 0.0;
  for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, i);
  return s;
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& o) {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("matrix shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

Matrix& Matrix::operator*=(cplx s) {
  for (auto& z : data_) z *= s;
  return *this;
}

std::vector<cplx> Matrix::apply(std::span<const cplx> v) const {
  if (v.size() != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
  std::vector<cplx> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator*(cplx s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("matrix product shape mismatch");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const cplx aik = a(i, k);
      if (aik == cplx(0.0)) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (auto z : a.data()) s += std::norm(z);
  return std::sqrt(s);
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw std::invalid_argument("shape mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
  return m;
}

double hermiticity_error(const Matrix& a) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j <= i; ++j) m = std::max(m, std::abs(a(i, j) - std::conj(a(j, i))));
  return m;
}

Matrix hermitian_part(const Matrix& a) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = 0.5 * (a(i, j) + std::conj(a(j, i)));
  return out;
}

namespace {

// Reduces a Hermitian matrix to real symmetric tridiagonal form (diag, off).
void tridiagonalize(Matrix a, std::vector<double>& diag, std::vector<double>& off) {
  const std::size_t n = a.rows();
  // Work from the lower triangle only.
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) a(i, j) = std::conj(a(j, i));

  std::vector<cplx> u(n), p(n), q(n);
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t r0 = k + 1;
    double xnorm2 = 0.0;
    for (std::size_t i = r0; i < n; ++i) xnorm2 += std::norm(a(i, k));
    const double tail2 = xnorm2 - std::norm(a(r0, k));
    if (tail2 <= 0.0) continue;

    const double xnorm = std::sqrt(xnorm2);
    const cplx alpha = a(r0, k);
    const cplx phase = std::abs(alpha) > 0.0 ? alpha / std::abs(alpha) : cplx(1.0);
    const cplx beta = -phase * xnorm;

    double unorm2 = 0.0;
    for (std::size_t i = r0; i < n; ++i) {
      u[i] = a(i, k);
      if (i == r0) u[i] -= beta;
      unorm2 += std::norm(u[i]);
    }
    if (unorm2 == 0.0) continue;
    const double c = 2.0 / unorm2;

    // p = c A22 u ; K = c (u^H p) / 2 ; q = p - K u ; A22 -= u q^H + q u^H
    for (std::size_t i = r0; i < n; ++i) {
      cplx s = 0.0;
      for (std::size_t j = r0; j < n; ++j) s += a(i, j) * u[j];
      p[i] = c * s;
    }
    cplx uhp = 0.0;
    for (std::size_t i = r0; i < n; ++i) uhp += std::conj(u[i]) * p[i];
    const double kfac = 0.5 * c * uhp.real();
    for (std::size_t i = r0; i < n; ++i) q[i] = p[i] - kfac * u[i];
    for (std::size_t i = r0; i < n; ++i)
      for (std::size_t j = r0; j < n; ++j)
        a(i, j) -= u[i] * std::conj(q[j]) + q[i] * std::conj(u[j]);

    a(r0, k) = beta;
    a(k, r0) = std::conj(beta);
    for (std::size_t i = r0 + 1; i < n; ++i) {
      a(i, k) = 0.0;
      a(k, i) = 0.0;
    }
  }

  diag.assign(n, 0.0);
  off.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) diag[i] = a(i, i).real();
  // A diagonal unitary similarity makes every off-diagonal entry real and
  // non-negative without touching the spectrum.
  for (std::size_t i = 0; i + 1 < n; ++i) off[i] = std::abs(a(i + 1, i));
}

// Implicit-shift QL on a symmetric tridiagonal matrix; off[i] couples i, i+1.
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, int max_iter) {
  const int n = static_cast<int>(d.size());
  if (n == 0) return;
  e[static_cast<std::size_t>(n - 1)] = 0.0;
  // QL prefers the large entries at the bottom; flip graded matrices.
  if (n > 1 && std::abs(d[0]) + std::abs(e[0]) > std::abs(d[n - 1]) + std::abs(e[n - 2])) {
    std::reverse(d.begin(), d.end());
    std::reverse(e.begin(), e.end() - 1);
  }
  double anorm = 0.0;
  for (int i = 0; i < n; ++i) anorm = std::max(anorm, std::abs(d[i]) + std::abs(e[i]) + (i ? std::abs(e[i - 1]) : 0.0));
  // Couplings below eps ||T|| are at the rounding level of the reduction.
  const double floor = std::numeric_limits<double>::epsilon() * anorm;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) + dd == dd || std::abs(e[m]) <= floor) break;
      }
      if (m != l) {
        if (iter++ == max_iter) throw EigenSolverError("tridiagonal QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        int i = m - 1;
        bool underflow = false;
        for (; i >= l; --i) {
          double f = s * e[i];
          const double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

}  // namespace

std::vector<double> hermitian_eigenvalues(const Matrix& a, int max_sweeps_per_eigenvalue) {
  if (!a.square()) throw std::invalid_argument("hermitian_eigenvalues: matrix must be square");
  for (auto z : a.data())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("hermitian_eigenvalues: non-finite entry");
  std::vector<double> d, e;
  tridiagonalize(a, d, e);
  tridiagonal_ql(d, e, max_sweeps_per_eigenvalue);
  std::sort(d.begin(), d.end());
  return d;
}

std::vector<double> singular_values(const Matrix& a) {
  auto ev = hermitian_eigenvalues(a.adjoint() * a);
  std::vector<double> sv(ev.size());
  for (std::size_t i = 0; i < ev.size(); ++i) sv[i] = std::sqrt(std::max(0.0, ev[ev.size() - 1 - i]));
  return sv;
}

double operator_norm(const Matrix& a) {
  const auto sv = singular_values(a);
  return sv.empty() ? 0.0 : sv.front();
}

double trace_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : singular_values(a)) s += v;
  return s;
}

double hermitian_trace_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : hermitian_eigenvalues(a)) s += std::abs(v);
  return s;
}

}  // namespace bmf
