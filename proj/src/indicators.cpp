#include "bmf/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmf {

namespace {

double quadratic_form(const Matrix& a, std::span<const cplx> v, double weight) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    cplx row = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) row += a(i, j) * v[j];
    s += std::conj(v[i]) * row;
  }
  return weight * s.real();
}

}  // namespace

double pickl_hat(const DensityMatrix& rho1, const WaveFunction& phi) {
  if (rho1.dim() != phi.size()) throw std::invalid_argument("pickl_hat: dimension mismatch");
  return 1.0 - quadratic_form(rho1.entries, phi.values, phi.grid.cell_volume());
}

double pickl_hat_pair(const DensityMatrix& rho12, const WaveFunction& phi1, const WaveFunction& phi2) {
  const std::size_t m = phi1.size();
  if (phi2.size() != m || rho12.dim() != m * m) throw std::invalid_argument("pickl_hat_pair: dimension mismatch");
  std::vector<cplx> v(m * m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) v[a * m + b] = phi1.values[a] * phi2.values[b];
  const double w = phi1.grid.cell_volume();
  return 1.0 - quadratic_form(rho12.entries, v, w * w);
}

double trace_distance(const DensityMatrix& a, const DensityMatrix& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("trace_distance: dimension mismatch");
  const Matrix d = a.entries - b.entries;
  const double scale = std::max(1.0, frobenius_norm(a.entries) + frobenius_norm(b.entries));
  if (hermiticity_error(d) > 1e-10 * scale) throw std::invalid_argument("trace_distance: non-Hermitian input");
  return hermitian_trace_norm(hermitian_part(d));
}

bool sandwich_check(double i_hat, double r, double tol) {
  const double i = std::max(0.0, i_hat);
  return i <= r + tol && r <= 2.0 * std::sqrt(2.0 * i) + tol;
}

bool pair_bound_check(double i_pair, double i_first, double i_second, double tol) {
  return i_pair <= i_first + i_second + tol;
}

DeltaStats delta_from_sum(const RealGridFunction& density_sum, std::size_t count, const RealGridFunction& xi) {
  if (count == 0) throw std::invalid_argument("delta_stats: need N >= 2");
  if (!(density_sum.grid == xi.grid)) throw std::invalid_argument("delta_stats: grid mismatch");
  const auto& g = xi.grid;
  const double inv = 1.0 / static_cast<double>(count);
  double l1 = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double d = density_sum.values[i] * inv - xi.values[i];
    l1 += std::abs(d);
    l2 += d * d;
  }
  DeltaStats s;
  s.n_particles = count + 1;
  s.l1_norm = g.cell_volume() * l1;
  s.l2_norm = std::sqrt(g.cell_volume() * l2);
  return s;
}

DeltaStats delta_stats(const std::vector<WaveFunction>& phis, const RealGridFunction& xi) {
  if (phis.empty()) throw std::invalid_argument("delta_stats: need N >= 2");
  RealGridFunction acc(xi.grid);
  for (const auto& p : phis) {
    if (!(p.grid == xi.grid)) throw std::invalid_argument("delta_stats: grid mismatch");
    for (std::size_t i = 0; i < acc.size(); ++i) acc.values[i] += std::norm(p.values[i]);
  }
  return delta_from_sum(acc, phis.size(), xi);
}

double p3_coefficient(const Matrix& p, const Matrix& rho, const Matrix& L) {
  const Matrix Ld = L.adjoint();
  const Matrix pL = p * L;
  const Matrix prho = p * rho;
  const double tau = ((L + Ld) * rho).trace().real();
  const cplx v = (pL * rho).trace() + (prho * Ld).trace() - tau * prho.trace();
  return v.real();
}

double p3_coefficient(const DensityMatrix& p, const DensityMatrix& rho, const CouplingOperator& L) {
  return p3_coefficient(p.entries, rho.entries, L.to_dense());
}

}  // namespace bmf
