#pragma once

#include <complex>
#include <cstddef>
#include <span>

#include "bmf/linalg.hpp"

// Hot loops of the N-body solver, each in a serial reference version and an
// OpenMP version. Both versions use the same summation order, so their
// results agree bit for bit and do not depend on the thread count.
namespace bmf::kernels {

using cplx = std::complex<double>;

// Reductions are split into chunks of this many elements; chunk partial sums
// are added in chunk order.
inline constexpr std::size_t reduction_chunk = 4096;

namespace serial {

// v[i] *= f[i]
void multiply(std::span<cplx> v, std::span<const cplx> f);
// sum |v[i]|^2
double squared_norm(std::span<const cplx> v);
// out[k] = sum_{o,i} |psi[o][k][i]|^2 for a [outer][m][inner] layout.
void axis_density(std::span<const cplx> psi, std::size_t outer, std::size_t m, std::size_t inner,
                  std::span<double> out);
// psi[x_1..x_N] *= 1 + sum_j c[j*m + x_j]  (N axes of length m, axis 0 slowest)
void separable_update(std::span<cplx> psi, std::size_t n_axes, std::size_t m,
                      std::span<const cplx> c);
// rho(x, y) = sum_r psi[x][r] conj(psi[y][r]) for a [m][rest] layout.
Matrix first_marginal(std::span<const cplx> psi, std::size_t m, std::size_t rest);

}  // namespace serial

namespace omp {

void multiply(std::span<cplx> v, std::span<const cplx> f);
double squared_norm(std::span<const cplx> v);
void axis_density(std::span<const cplx> psi, std::size_t outer, std::size_t m, std::size_t inner,
                  std::span<double> out);
void separable_update(std::span<cplx> psi, std::size_t n_axes, std::size_t m,
                      std::span<const cplx> c);
Matrix first_marginal(std::span<const cplx> psi, std::size_t m, std::size_t rest);

}  // namespace omp

}  // namespace bmf::kernels
