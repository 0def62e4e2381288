#pragma once

#include <span>

#include "bmf/grid.hpp"
#include "bmf/linalg.hpp"

namespace bmf {

/// Density operator on a grid, stored in the orthonormal point basis.
///
/// `entries` is the integral kernel times the quadrature weight, i.e. the
/// matrix of the operator in the basis e_k / sqrt(w). Traces, products and
/// eigenvalues therefore need no further weighting. `quadrature_weight` keeps
/// w = h^{d * particles} so kernels can be recovered.
struct DensityMatrix {
  Matrix entries;
  double quadrature_weight = 1.0;

  DensityMatrix() = default;
  DensityMatrix(Matrix m, double weight) : entries(std::move(m)), quadrature_weight(weight) {}

  // w psi psi^dagger
  static DensityMatrix pure(std::span<const cplx> values, double weight);
  static DensityMatrix pure(const WaveFunction& u) {
    return pure(u.values, u.grid.cell_volume());
  }

  std::size_t dim() const { return entries.rows(); }
  double trace() const { return entries.trace().real(); }

  // Throws std::invalid_argument unless Hermitian, PSD and of unit trace.
  void require_state(double herm_tol = 1e-10, double eig_tol = 1e-8, double trace_tol = 1e-8) const;
};

}  // namespace bmf
