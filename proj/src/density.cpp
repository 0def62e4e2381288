#include "bmf/density.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bmf {

DensityMatrix DensityMatrix::pure(std::span<const cplx> values, double weight) {
  DensityMatrix p(Matrix::outer(values, values), weight);
  p.entries *= weight;
  return p;
}

void DensityMatrix::require_state(double herm_tol, double eig_tol, double trace_tol) const {
  if (!entries.square() || entries.rows() == 0) throw std::invalid_argument("density: not square");
  if (hermiticity_error(entries) > herm_tol) throw std::invalid_argument("density: not Hermitian");
  if (std::abs(trace() - 1.0) > trace_tol)
    throw std::invalid_argument("density: trace " + std::to_string(trace()) + " differs from 1");
  const auto ev = hermitian_eigenvalues(entries);
  if (ev.front() < -eig_tol) throw std::invalid_argument("density: negative eigenvalue");
}

}  // namespace bmf
