#pragma once

#include <cstddef>
#include <vector>

#include "bmf/coupling.hpp"
#include "bmf/density.hpp"
#include "bmf/grid.hpp"

namespace bmf {

struct IndicatorSample {
  double t = 0.0;
  std::size_t n_particles = 0;
  std::size_t repetition = 0;
  double i_hat = 0.0;
  double r_trace = 0.0;
};

struct DeltaStats {
  double t = 0.0;
  std::size_t n_particles = 0;
  double l1_norm = 0.0;
  double l2_norm = 0.0;
};

// 1 - (phi, rho1 phi)
double pickl_hat(const DensityMatrix& rho1, const WaveFunction& phi);
// 1 - (phi1 x phi2, rho12 phi1 x phi2) for a pair marginal.
double pickl_hat_pair(const DensityMatrix& rho12, const WaveFunction& phi1, const WaveFunction& phi2);

// ||a - b||_1 for Hermitian a, b through the in-repo eigensolver.
double trace_distance(const DensityMatrix& a, const DensityMatrix& b);

// I <= R <= 2 sqrt(2 I) within tol (I clamped at 0 first).
bool sandwich_check(double i_hat, double r, double tol = 1e-6);
// I^{12} <= I^1 + I^2 within tol; in expectation this gives I^{N,J} <= |J| I^{N,1}.
bool pair_bound_check(double i_pair, double i_first, double i_second, double tol = 1e-8);

// delta = (1/(N-1)) sum_j |phi_j|^2 - xi over the N-1 wave functions given.
DeltaStats delta_stats(const std::vector<WaveFunction>& phis, const RealGridFunction& xi);
// Same from the running sum of |phi_j|^2 over `count` wave functions.
DeltaStats delta_from_sum(const RealGridFunction& density_sum, std::size_t count, const RealGridFunction& xi);

// Tr(pL rho + p rho L* - Tr((L + L*) rho) p rho), matrices in the orthonormal
// basis.
double p3_coefficient(const Matrix& p, const Matrix& rho, const Matrix& L);
double p3_coefficient(const DensityMatrix& p, const DensityMatrix& rho, const CouplingOperator& L);

}  // namespace bmf
