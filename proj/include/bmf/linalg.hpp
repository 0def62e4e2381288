#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace bmf {

using cplx = std::complex<double>;

/// Dense row-major complex matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  static Matrix identity(std::size_t m);
  static Matrix outer(std::span<const cplx> a, std::span<const cplx> b);  // a b^dagger

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  std::span<cplx> data() { return data_; }
  std::span<const cplx> data() const { return data_; }

  Matrix adjoint() const;
  cplx trace() const;

  Matrix& operator+=(const Matrix& o);
  Matrix& operator-=(const Matrix& o);
  Matrix& operator*=(cplx s);

  std::vector<cplx> apply(std::span<const cplx> v) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<cplx> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(cplx s, Matrix a);

double frobenius_norm(const Matrix& a);
double max_abs_diff(const Matrix& a, const Matrix& b);
double hermiticity_error(const Matrix& a);
Matrix hermitian_part(const Matrix& a);  // (A + A^dagger)/2

class EigenSolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Eigenvalues (ascending) of a Hermitian matrix.
///
/// Householder reduction to a real symmetric tridiagonal matrix followed by
/// implicit-shift QL iterations. Only the lower triangle is read.
std::vector<double> hermitian_eigenvalues(const Matrix& a, int max_sweeps_per_eigenvalue = 60);

/// Singular values (descending) through the eigenvalues of A^dagger A.
std::vector<double> singular_values(const Matrix& a);

// Norms of an arbitrary square matrix: largest singular value, Hilbert-Schmidt
// and trace norm (sum of singular values).
double operator_norm(const Matrix& a);
double trace_norm(const Matrix& a);

// Sum of |eigenvalues| of a Hermitian matrix.
double hermitian_trace_norm(const Matrix& a);

}  // namespace bmf
