#include "bmf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "bmf/fft.hpp"

namespace bmf {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void require_same_grid(const GridSpec& a, const GridSpec& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

GridSpec::GridSpec(int dim_, std::size_t n_, double box_length_, std::size_t max_points)
    : dim(dim_), n(n_), box_length(box_length_) {
  if (dim < 1 || dim > 3) throw std::invalid_argument("GridSpec: dim must be 1, 2 or 3");
  if (n < 4 || !is_power_of_two(n))
    throw std::invalid_argument("GridSpec: points per axis must be a power of two >= 4");
  if (!(box_length > 0.0) || !std::isfinite(box_length))
    throw std::invalid_argument("GridSpec: box length must be positive");
  if (size() > max_points) throw std::invalid_argument("GridSpec: grid exceeds memory budget");
}

double GridSpec::cell_volume() const { return std::pow(spacing(), dim); }

std::size_t GridSpec::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= n;
  return s;
}

double GridSpec::coordinate(std::size_t i) const {
  const auto k = static_cast<double>(i < n / 2 ? static_cast<long>(i)
                                               : static_cast<long>(i) - static_cast<long>(n));
  return k * spacing();
}

double GridSpec::wavenumber(std::size_t i) const {
  const auto k = static_cast<double>(i < n / 2 ? static_cast<long>(i)
                                               : static_cast<long>(i) - static_cast<long>(n));
  return 2.0 * std::numbers::pi * k / box_length;
}

std::array<std::size_t, 3> GridSpec::unravel(std::size_t flat) const {
  std::array<std::size_t, 3> idx{0, 0, 0};
  for (int a = dim - 1; a >= 0; --a) {
    idx[static_cast<std::size_t>(a)] = flat % n;
    flat /= n;
  }
  return idx;
}

std::size_t GridSpec::ravel(const std::array<std::size_t, 3>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dim; ++a) flat = flat * n + idx[static_cast<std::size_t>(a)];
  return flat;
}

double GridSpec::wrap(double x) const {
  double y = std::fmod(x + 0.5 * box_length, box_length);
  if (y < 0) y += box_length;
  return y - 0.5 * box_length;
}

WaveFunction::WaveFunction(const GridSpec& g, std::vector<cplx> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("WaveFunction: size mismatch");
}

bool WaveFunction::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

RealGridFunction::RealGridFunction(const GridSpec& g, std::vector<double> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("RealGridFunction: size mismatch");
}

bool RealGridFunction::all_finite() const {
  return std::all_of(values.begin(), values.end(), [](double x) { return std::isfinite(x); });
}

double inner_l2(const WaveFunction& u, const WaveFunction& v) {
  require_same_grid(u.grid, v.grid, "inner_l2");
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    s += u.values[i].real() * v.values[i].real() + u.values[i].imag() * v.values[i].imag();
  return u.grid.cell_volume() * s;
}

double l2_norm(const WaveFunction& u) { return std::sqrt(inner_l2(u, u)); }

std::vector<double> squared_wavenumbers(std::size_t n, double box_length, int rank) {
  std::vector<double> k1(n);
  const GridSpec axis(1, n, box_length, ~std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) k1[i] = axis.wavenumber(i) * axis.wavenumber(i);
  std::size_t total = 1;
  for (int r = 0; r < rank; ++r) total *= n;
  std::vector<double> k2(total, 0.0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t rest = flat;
    double s = 0.0;
    for (int r = 0; r < rank; ++r) {
      s += k1[rest % n];
      rest /= n;
    }
    k2[flat] = s;
  }
  return k2;
}

double gradient_l2_norm(const WaveFunction& u) {
  const auto& g = u.grid;
  std::vector<cplx> hat = u.values;
  fft_plan(g.dim, g.n).forward(hat);
  const auto k2 = squared_wavenumbers(g.n, g.box_length, g.dim);
  double s = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i) s += k2[i] * std::norm(hat[i]);
  // Parseval for the unnormalized DFT: sum |u|^2 = sum |u_hat|^2 / size.
  return std::sqrt(g.cell_volume() * s / static_cast<double>(g.size()));
}

double h1_norm(const WaveFunction& u) {
  const double l2 = l2_norm(u);
  const double grad = gradient_l2_norm(u);
  return std::sqrt(l2 * l2 + grad * grad);
}

WaveFunction spectral_derivative(const WaveFunction& u, int axis) {
  const auto& g = u.grid;
  if (axis < 0 || axis >= g.dim) throw std::invalid_argument("spectral_derivative: bad axis");
  WaveFunction out(g, u.values);
  const auto& plan = fft_plan(g.dim, g.n);
  plan.forward(out.values);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    const auto idx = g.unravel(flat);
    const double k = g.wavenumber(idx[static_cast<std::size_t>(axis)]);
    out.values[flat] *= cplx(0.0, k * inv);
  }
  plan.backward(out.values);
  return out;
}

void require_normalized(const WaveFunction& u, const Tolerances& tol) {
  if (!u.all_finite()) throw std::invalid_argument("wave function has non-finite values");
  if (std::abs(l2_norm(u) - 1.0) > tol.norm_tol)
    throw std::invalid_argument("wave function is not normalized");
}

void require_density(const RealGridFunction& f, const Tolerances& tol) {
  if (!f.all_finite()) throw std::invalid_argument("density has non-finite values");
  for (double v : f.values)
    if (v < -tol.density_tol) throw std::invalid_argument("density has negative values");
  if (std::abs(l1_norm(f) - 1.0) > tol.norm_tol)
    throw std::invalid_argument("density does not have unit mass");
}

void normalize(WaveFunction& u) {
  const double nrm = l2_norm(u);
  if (!(nrm > 0.0)) throw std::invalid_argument("normalize: zero wave function");
  for (auto& z : u.values) z /= nrm;
}

WaveFunction free_propagate(const WaveFunction& u, double t) {
  if (t == 0.0) return u;
  const auto& g = u.grid;
  WaveFunction out(g, u.values);
  const auto& plan = fft_plan(g.dim, g.n);
  plan.forward(out.values);
  const auto k2 = squared_wavenumbers(g.n, g.box_length, g.dim);
  const double inv = 1.0 / static_cast<double>(g.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] *= std::polar(inv, -k2[i] * t);
  plan.backward(out.values);
  return out;
}

RealGridFunction convolve_potential(const RealGridFunction& V, const RealGridFunction& xi) {
  require_same_grid(V.grid, xi.grid, "convolve_potential");
  const auto& g = V.grid;
  std::vector<cplx> a(V.values.begin(), V.values.end());
  std::vector<cplx> b(xi.values.begin(), xi.values.end());
  const auto& plan = fft_plan(g.dim, g.n);
  plan.forward(a);
  plan.forward(b);
  const double scale = g.cell_volume() / static_cast<double>(g.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i] * scale;
  plan.backward(a);
  RealGridFunction out(g);
  for (std::size_t i = 0; i < a.size(); ++i) out.values[i] = a[i].real();
  return out;
}

double l1_norm(const RealGridFunction& f) {
  double s = 0.0;
  for (double v : f.values) s += std::abs(v);
  return f.grid.cell_volume() * s;
}

double l2_norm(const RealGridFunction& f) {
  double s = 0.0;
  for (double v : f.values) s += v * v;
  return std::sqrt(f.grid.cell_volume() * s);
}

double sup_norm(const RealGridFunction& f) {
  double s = 0.0;
  for (double v : f.values) s = std::max(s, std::abs(v));
  return s;
}

RealGridFunction density_of(const WaveFunction& u) {
  RealGridFunction out(u.grid);
  for (std::size_t i = 0; i < u.size(); ++i) out.values[i] = std::norm(u.values[i]);
  return out;
}

WaveFunction gaussian_packet(const GridSpec& g, double center, double width, double momentum) {
  if (!(width > 0.0)) throw std::invalid_argument("gaussian_packet: width must be positive");
  WaveFunction u(g);
  for (std::size_t flat = 0; flat < u.size(); ++flat) {
    const auto idx = g.unravel(flat);
    double r2 = 0.0;
    double x0 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      double x = g.coordinate(idx[static_cast<std::size_t>(a)]);
      if (a == 0) {
        x = g.wrap(x - center);
        x0 = x;
      }
      r2 += x * x;
    }
    u.values[flat] = std::polar(std::exp(-r2 / (4.0 * width * width)), momentum * x0);
  }
  normalize(u);
  return u;
}

}  // namespace bmf
