#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace bmf {

using cplx = std::complex<double>;

/// Uniform periodic grid on the box [-L/2, L/2)^d.
///
/// Samples are stored in FFT order along every axis: index 0 sits at the
/// origin and indices k >= n/2 map to negative coordinates (k - n) h. With
/// this layout a periodic convolution is a plain circular convolution of the
/// index arrays and evenness reads V[k] == V[-k mod n].
struct GridSpec {
  static constexpr std::size_t default_max_points = std::size_t{1} << 24;

  int dim = 1;
  std::size_t n = 64;
  double box_length = 20.0;

  GridSpec() = default;
  GridSpec(int dim, std::size_t n, double box_length,
           std::size_t max_points = default_max_points);

  double spacing() const { return box_length / static_cast<double>(n); }
  double cell_volume() const;
  std::size_t size() const;

  // Coordinate and angular wavenumber of index i along one axis.
  double coordinate(std::size_t i) const;
  double wavenumber(std::size_t i) const;

  std::array<std::size_t, 3> unravel(std::size_t flat) const;
  std::size_t ravel(const std::array<std::size_t, 3>& idx) const;

  // Wraps a displacement into [-L/2, L/2).
  double wrap(double x) const;

  bool operator==(const GridSpec&) const = default;
};

struct WaveFunction {
  GridSpec grid;
  std::vector<cplx> values;

  WaveFunction() = default;
  explicit WaveFunction(const GridSpec& g) : grid(g), values(g.size()) {}
  WaveFunction(const GridSpec& g, std::vector<cplx> v);

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
};

struct RealGridFunction {
  GridSpec grid;
  std::vector<double> values;

  RealGridFunction() = default;
  explicit RealGridFunction(const GridSpec& g) : grid(g), values(g.size()) {}
  RealGridFunction(const GridSpec& g, std::vector<double> v);

  std::size_t size() const { return values.size(); }
  bool all_finite() const;
};

struct Tolerances {
  double norm_tol = 1e-9;
  double density_tol = 1e-12;
};

// Real symmetric L2 product h^d Re sum u conj(v).
double inner_l2(const WaveFunction& u, const WaveFunction& v);
double l2_norm(const WaveFunction& u);
double gradient_l2_norm(const WaveFunction& u);
double h1_norm(const WaveFunction& u);

// Spectral gradient along axis `axis` (0-based).
WaveFunction spectral_derivative(const WaveFunction& u, int axis);

void require_normalized(const WaveFunction& u, const Tolerances& tol = {});
void require_density(const RealGridFunction& f, const Tolerances& tol = {});
void normalize(WaveFunction& u);

/// S(t) = exp(i t Laplacian), applied exactly in Fourier space.
WaveFunction free_propagate(const WaveFunction& u, double t);

/// Periodic convolution h^d sum_j V(x_i - x_j) xi(x_j).
RealGridFunction convolve_potential(const RealGridFunction& V,
                                    const RealGridFunction& xi);

double l1_norm(const RealGridFunction& f);
double l2_norm(const RealGridFunction& f);
double sup_norm(const RealGridFunction& f);

RealGridFunction density_of(const WaveFunction& u);

// Gaussian packet whose density has standard deviation `width` per axis,
// centred at `center` (first axis) with momentum `momentum` along axis 0.
WaveFunction gaussian_packet(const GridSpec& g, double center, double width,
                             double momentum = 0.0);

// Sum of |k|^2 over the axes of a rank-r tensor grid, in FFT order.
std::vector<double> squared_wavenumbers(std::size_t n, double box_length,
                                        int rank);

}  // namespace bmf
