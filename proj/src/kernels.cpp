#include "bmf/kernels.hpp"

#include <stdexcept>
#include <vector>

namespace bmf::kernels {

namespace {

double chunk_norm(std::span<const cplx> v, std::size_t c) {
  const std::size_t lo = c * reduction_chunk;
  const std::size_t hi = std::min(v.size(), lo + reduction_chunk);
  double s = 0.0;
  for (std::size_t i = lo; i < hi; ++i) s += std::norm(v[i]);
  return s;
}

std::size_t chunk_count(std::size_t n) { return (n + reduction_chunk - 1) / reduction_chunk; }

double axis_density_entry(std::span<const cplx> psi, std::size_t outer, std::size_t m,
                          std::size_t inner, std::size_t k) {
  double s = 0.0;
  for (std::size_t o = 0; o < outer; ++o) {
    const std::size_t base = (o * m + k) * inner;
    for (std::size_t i = 0; i < inner; ++i) s += std::norm(psi[base + i]);
  }
  return s;
}

// Updates the block of entries whose slowest index is x0.
void separable_row(std::span<cplx> psi, std::size_t n_axes, std::size_t m, std::span<const cplx> c,
                   std::size_t x0) {
  std::size_t block = 1;
  for (std::size_t a = 1; a < n_axes; ++a) block *= m;
  cplx* row = psi.data() + x0 * block;
  if (n_axes == 1) {
    row[0] *= 1.0 + c[x0];
    return;
  }
  std::vector<std::size_t> idx(n_axes, 0);
  for (std::size_t r = 0; r < block; r += m) {
    cplx base = 1.0 + c[x0];
    for (std::size_t a = 1; a + 1 < n_axes; ++a) base += c[a * m + idx[a]];
    const cplx* last = c.data() + (n_axes - 1) * m;
    for (std::size_t x = 0; x < m; ++x) row[r + x] *= base + last[x];
    for (std::size_t a = n_axes - 1; a-- > 1;) {
      if (++idx[a] < m) break;
      idx[a] = 0;
    }
  }
}

void check_separable(std::span<cplx> psi, std::size_t n_axes, std::size_t m, std::span<const cplx> c) {
  std::size_t total = 1;
  for (std::size_t a = 0; a < n_axes; ++a) total *= m;
  if (n_axes == 0 || psi.size() != total || c.size() != n_axes * m)
    throw std::invalid_argument("separable_update: shape mismatch");
}

cplx marginal_entry(const cplx* px, const cplx* py, std::size_t rest) {
  cplx s = 0.0;
  for (std::size_t r = 0; r < rest; ++r) s += px[r] * std::conj(py[r]);
  return s;
}

void check_marginal(std::span<const cplx> psi, std::size_t m, std::size_t rest) {
  if (psi.size() != m * rest) throw std::invalid_argument("first_marginal: shape mismatch");
}

}  // namespace

namespace serial {

void multiply(std::span<cplx> v, std::span<const cplx> f) {
  if (v.size() != f.size()) throw std::invalid_argument("multiply: size mismatch");
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= f[i];
}

double squared_norm(std::span<const cplx> v) {
  const std::size_t nc = chunk_count(v.size());
  double s = 0.0;
  for (std::size_t c = 0; c < nc; ++c) s += chunk_norm(v, c);
  return s;
}

void axis_density(std::span<const cplx> psi, std::size_t outer, std::size_t m, std::size_t inner,
                  std::span<double> out) {
  if (psi.size() != outer * m * inner || out.size() != m)
    throw std::invalid_argument("axis_density: shape mismatch");
  for (std::size_t k = 0; k < m; ++k) out[k] = axis_density_entry(psi, outer, m, inner, k);
}

void separable_update(std::span<cplx> psi, std::size_t n_axes, std::size_t m,
                      std::span<const cplx> c) {
  check_separable(psi, n_axes, m, c);
  for (std::size_t x0 = 0; x0 < m; ++x0) separable_row(psi, n_axes, m, c, x0);
}

Matrix first_marginal(std::span<const cplx> psi, std::size_t m, std::size_t rest) {
  check_marginal(psi, m, rest);
  Matrix rho(m, m);
  for (std::size_t x = 0; x < m; ++x)
    for (std::size_t y = 0; y <= x; ++y) {
      rho(x, y) = marginal_entry(psi.data() + x * rest, psi.data() + y * rest, rest);
      rho(y, x) = std::conj(rho(x, y));
    }
  return rho;
}

}  // namespace serial

namespace omp {

void multiply(std::span<cplx> v, std::span<const cplx> f) {
  if (v.size() != f.size()) throw std::invalid_argument("multiply: size mismatch");
  const auto n = static_cast<std::ptrdiff_t>(v.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] *= f[static_cast<std::size_t>(i)];
}

double squared_norm(std::span<const cplx> v) {
  const std::size_t nc = chunk_count(v.size());
  std::vector<double> partial(nc);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(nc); ++c)
    partial[static_cast<std::size_t>(c)] = chunk_norm(v, static_cast<std::size_t>(c));
  double s = 0.0;
  for (double p : partial) s += p;
  return s;
}

void axis_density(std::span<const cplx> psi, std::size_t outer, std::size_t m, std::size_t inner,
                  std::span<double> out) {
  if (psi.size() != outer * m * inner || out.size() != m)
    throw std::invalid_argument("axis_density: shape mismatch");
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(m); ++k)
    out[static_cast<std::size_t>(k)] = axis_density_entry(psi, outer, m, inner, static_cast<std::size_t>(k));
}

void separable_update(std::span<cplx> psi, std::size_t n_axes, std::size_t m,
                      std::span<const cplx> c) {
  check_separable(psi, n_axes, m, c);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t x0 = 0; x0 < static_cast<std::ptrdiff_t>(m); ++x0)
    separable_row(psi, n_axes, m, c, static_cast<std::size_t>(x0));
}

Matrix first_marginal(std::span<const cplx> psi, std::size_t m, std::size_t rest) {
  check_marginal(psi, m, rest);
  Matrix rho(m, m);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t xs = 0; xs < static_cast<std::ptrdiff_t>(m); ++xs) {
    const auto x = static_cast<std::size_t>(xs);
    for (std::size_t y = 0; y <= x; ++y) {
      rho(x, y) = marginal_entry(psi.data() + x * rest, psi.data() + y * rest, rest);
      rho(y, x) = std::conj(rho(x, y));
    }
  }
  return rho;
}

}  // namespace omp

}  // namespace bmf::kernels
