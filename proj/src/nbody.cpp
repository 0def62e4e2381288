#include "bmf/nbody.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmf/kernels.hpp"

namespace bmf {

namespace {

constexpr std::size_t kMaxTensorPoints = std::size_t{1} << 28;

std::size_t ipow(std::size_t b, std::size_t e) {
  std::size_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= b;
  return r;
}

}  // namespace

std::size_t tensor_size(std::size_t m, std::size_t N) {
  if (N < 1) throw std::invalid_argument("N must be >= 1");
  std::size_t s = 1;
  for (std::size_t i = 0; i < N; ++i) {
    if (s > kMaxTensorPoints / m) throw std::invalid_argument("N-body state exceeds the point limit");
    s *= m;
  }
  return s;
}

std::size_t nbody_memory_bytes(const GridSpec& g, std::size_t N) {
  return 6 * tensor_size(g.size(), N) * sizeof(cplx);
}

WaveFunctionNP::WaveFunctionNP(const GridSpec& g, std::size_t N)
    : grid(g), n_particles(N), values(tensor_size(g.size(), N)) {}

WaveFunctionNP::WaveFunctionNP(const GridSpec& g, std::size_t N, std::vector<cplx> v)
    : grid(g), n_particles(N), values(std::move(v)) {
  if (values.size() != tensor_size(g.size(), N)) throw std::invalid_argument("WaveFunctionNP: size mismatch");
}

WaveFunctionNP WaveFunctionNP::product(const std::vector<WaveFunction>& factors) {
  if (factors.empty()) throw std::invalid_argument("product: no factors");
  const auto& g = factors.front().grid;
  for (const auto& f : factors)
    if (!(f.grid == g)) throw std::invalid_argument("product: grid mismatch");
  WaveFunctionNP psi(g, factors.size());
  const std::size_t m = g.size();
  std::vector<cplx> cur{1.0};
  for (const auto& f : factors) {
    std::vector<cplx> next(cur.size() * m);
    for (std::size_t a = 0; a < cur.size(); ++a)
      for (std::size_t x = 0; x < m; ++x) next[a * m + x] = cur[a] * f.values[x];
    cur = std::move(next);
  }
  psi.values = std::move(cur);
  return psi;
}

WaveFunctionNP WaveFunctionNP::tensor_power(const WaveFunction& phi, std::size_t N) {
  return product(std::vector<WaveFunction>(N, phi));
}

double WaveFunctionNP::weight() const {
  return std::pow(grid.cell_volume(), static_cast<double>(n_particles));
}

double WaveFunctionNP::norm() const { return std::sqrt(weight() * kernels::serial::squared_norm(values)); }

bool WaveFunctionNP::all_finite() const {
  return std::all_of(values.begin(), values.end(),
                     [](cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

WaveFunctionNP permute_particles(const WaveFunctionNP& psi, const std::vector<std::size_t>& perm) {
  const std::size_t N = psi.n_particles;
  const std::size_t m = psi.one_body_size();
  if (perm.size() != N) throw std::invalid_argument("permutation length mismatch");
  std::vector<bool> seen(N, false);
  for (auto p : perm) {
    if (p >= N || seen[p]) throw std::invalid_argument("not a permutation");
    seen[p] = true;
  }
  std::vector<std::size_t> stride(N);
  for (std::size_t a = 0; a < N; ++a) stride[a] = ipow(m, N - 1 - a);
  WaveFunctionNP out(psi.grid, N);
  for (std::size_t flat = 0; flat < psi.size(); ++flat) {
    std::size_t rest = flat, target = 0;
    for (std::size_t a = N; a-- > 0;) {
      target += (rest % m) * stride[perm[a]];
      rest /= m;
    }
    out.values[target] = psi.values[flat];
  }
  return out;
}

NBodyStepper::NBodyStepper(const GridSpec& g, std::size_t N, const SchemeParams& params,
                           const Physics& phys, std::size_t memory_budget_mb, bool parallel)
    : grid_(g), N_(N), params_(params), phys_(phys), parallel_(parallel),
      plan_(fft_plan(static_cast<int>(g.dim * N), g.n)), m_(g.size()) {
  params.validate(phys.L.norm_bound());
  if (!(phys.L.grid() == g)) throw std::invalid_argument("coupling operator grid mismatch");
  if (!phys.V.is_zero() && !(phys.V.samples.grid == g)) throw std::invalid_argument("potential grid mismatch");
  const std::size_t need = nbody_memory_bytes(g, N);
  if (need > memory_budget_mb * (std::size_t{1} << 20))
    throw std::invalid_argument("N-body state needs " + std::to_string(need >> 20) +
                                " MiB, over the memory budget of " + std::to_string(memory_budget_mb) + " MiB");

  const auto k2 = squared_wavenumbers(g.n, g.box_length, static_cast<int>(g.dim * N));
  const double inv = 1.0 / static_cast<double>(k2.size());
  half_.resize(k2.size());
  full_.resize(k2.size());
  for (std::size_t i = 0; i < k2.size(); ++i) {
    half_[i] = std::polar(inv, -0.5 * params.dt * k2[i]);
    full_[i] = std::polar(inv, -params.dt * k2[i]);
  }

  if (N >= 2 && !phys.V.is_zero()) {
    // V on the periodic difference grid: vd[x * m + y] = V(x - y).
    std::vector<double> vd(m_ * m_);
    for (std::size_t x = 0; x < m_; ++x) {
      const auto ix = g.unravel(x);
      for (std::size_t y = 0; y < m_; ++y) {
        const auto iy = g.unravel(y);
        std::array<std::size_t, 3> d{0, 0, 0};
        for (int a = 0; a < g.dim; ++a) {
          const auto u = static_cast<std::size_t>(a);
          d[u] = (ix[u] + g.n - iy[u]) % g.n;
        }
        vd[x * m_ + y] = phys.V.samples.values[g.ravel(d)];
      }
    }
    const std::size_t total = tensor_size(m_, N);
    interaction_.resize(total);
    const double scale = -params.dt / static_cast<double>(N);
    std::vector<std::size_t> idx(N);
    for (std::size_t flat = 0; flat < total; ++flat) {
      std::size_t rest = flat;
      for (std::size_t a = N; a-- > 0;) {
        idx[a] = rest % m_;
        rest /= m_;
      }
      double s = 0.0;
      for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) s += vd[idx[a] * m_ + idx[b]];
      interaction_[flat] = std::polar(1.0, scale * s);
    }
  }
}

void NBodyStepper::kinetic(std::vector<cplx>& v, const std::vector<cplx>& factors) const {
  plan_.forward(v);
  if (parallel_)
    kernels::omp::multiply(v, factors);
  else
    kernels::serial::multiply(v, factors);
  plan_.backward(v);
}

void NBodyStepper::interaction(std::vector<cplx>& v) const {
  if (interaction_.empty()) return;
  if (parallel_)
    kernels::omp::multiply(v, interaction_);
  else
    kernels::serial::multiply(v, interaction_);
}

double NBodyStepper::coupling(std::vector<cplx>& v, std::span<const double> dW) const {
  const double w = std::pow(grid_.cell_volume(), static_cast<double>(N_));
  const auto& L = phys_.L;
  auto sqnorm = [&](std::span<const cplx> x) {
    return parallel_ ? kernels::omp::squared_norm(x) : kernels::serial::squared_norm(x);
  };

  if (!L.is_zero()) {
    if (L.kind() == CouplingOperator::Kind::multiplication) {
      const auto g = L.symbol();
      std::vector<double> dens(m_);
      std::vector<cplx> c(N_ * m_);
      for (std::size_t j = 0; j < N_; ++j) {
        const std::size_t outer = ipow(m_, j), inner = ipow(m_, N_ - 1 - j);
        if (parallel_)
          kernels::omp::axis_density(v, outer, m_, inner, dens);
        else
          kernels::serial::axis_density(v, outer, m_, inner, dens);
        double s = 0.0;
        for (std::size_t k = 0; k < m_; ++k) s += g[k].real() * dens[k];
        const double mu = w * s;
        for (std::size_t x = 0; x < m_; ++x) {
          const cplx f1 = std::norm(g[x]) - 2.0 * mu * g[x] + mu * mu;
          c[j * m_ + x] = -0.5 * params_.dt * f1 + (g[x] - mu) * dW[j];
        }
      }
      if (parallel_)
        kernels::omp::separable_update(v, N_, m_, c);
      else
        kernels::serial::separable_update(v, N_, m_, c);
    } else {
      std::vector<cplx> delta(v.size(), 0.0), lv(v.size()), llv(v.size());
      for (std::size_t j = 0; j < N_; ++j) {
        const std::size_t outer = ipow(m_, j), inner = ipow(m_, N_ - 1 - j);
        L.apply_axis(v, lv, outer, inner, false);
        L.apply_axis(lv, llv, outer, inner, true);
        double s = 0.0;
        for (std::size_t i = 0; i < v.size(); ++i) s += v[i].real() * lv[i].real() + v[i].imag() * lv[i].imag();
        const double mu = w * s;
        for (std::size_t i = 0; i < v.size(); ++i)
          delta[i] += -0.5 * params_.dt * (llv[i] - 2.0 * mu * lv[i] + mu * mu * v[i]) + (lv[i] - mu * v[i]) * dW[j];
      }
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += delta[i];
    }
  }
  const double nrm = std::sqrt(w * sqnorm(v));
  if (params_.renormalize && nrm > 0.0 && std::isfinite(nrm)) {
    const double inv = 1.0 / nrm;
    for (auto& z : v) z *= inv;
  }
  return nrm;
}

double NBodyStepper::step(WaveFunctionNP& psi, std::span<const double> dW) const {
  if (psi.n_particles != N_ || !(psi.grid == grid_)) throw std::invalid_argument("step: shape mismatch");
  if (dW.size() != N_) throw std::invalid_argument("step: need one increment per particle");
  kinetic(psi.values, half_);
  interaction(psi.values);
  const double nrm = coupling(psi.values, dW);
  kinetic(psi.values, half_);
  if (!std::isfinite(nrm) || !(nrm > 0.0)) throw NumericalAbort("non-finite N-body state", 0);
  return nrm;
}

double NBodyStepper::evolve(WaveFunctionNP& psi, std::size_t first_step, std::size_t steps,
                            const IncrementFn& dW) const {
  if (psi.n_particles != N_ || !(psi.grid == grid_)) throw std::invalid_argument("evolve: shape mismatch");
  if (steps == 0) return 0.0;
  double max_drift = 0.0;
  std::vector<double> inc(N_);
  kinetic(psi.values, half_);
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t k = first_step + s;
    for (std::size_t j = 0; j < N_; ++j) inc[j] = dW(static_cast<std::uint32_t>(j), k);
    interaction(psi.values);
    const double nrm = coupling(psi.values, inc);
    if (!std::isfinite(nrm) || !(nrm > 0.0)) throw NumericalAbort("non-finite N-body state", k);
    max_drift = std::max(max_drift, std::abs(nrm - 1.0));
    kinetic(psi.values, s + 1 < steps ? full_ : half_);
  }
  return max_drift;
}

WaveFunctionNP step_nbody(const WaveFunctionNP& psi, std::span<const double> dW,
                          const SchemeParams& params, const Physics& phys) {
  const NBodyStepper st(psi.grid, psi.n_particles, params, phys);
  WaveFunctionNP out = psi;
  st.step(out, dW);
  return out;
}

DensityMatrix density_from_wave(const WaveFunctionNP& psi) {
  if (psi.size() > max_full_density_size)
    throw std::invalid_argument("density_from_wave: state larger than 4096 entries");
  return DensityMatrix::pure(psi.values, psi.weight());
}

DensityMatrix first_marginal(const WaveFunctionNP& psi, bool parallel) {
  const std::size_t m = psi.one_body_size();
  const std::size_t rest = psi.size() / m;
  Matrix rho = parallel ? kernels::omp::first_marginal(psi.values, m, rest)
                        : kernels::serial::first_marginal(psi.values, m, rest);
  rho *= psi.weight();
  return DensityMatrix(std::move(rho), psi.grid.cell_volume());
}

DensityMatrix pair_marginal(const WaveFunctionNP& psi, std::size_t j, std::size_t k) {
  const std::size_t N = psi.n_particles;
  const std::size_t m = psi.one_body_size();
  if (N < 2 || j >= N || k >= N || j == k) throw std::invalid_argument("pair_marginal: bad particle pair");
  if (m * m > max_full_density_size) throw std::invalid_argument("pair_marginal: pair space exceeds 4096");
  std::vector<std::size_t> perm(N);
  std::size_t next = 2;
  for (std::size_t a = 0; a < N; ++a) perm[a] = a == j ? 0 : a == k ? 1 : next++;
  const auto moved = permute_particles(psi, perm);
  Matrix rho = kernels::serial::first_marginal(moved.values, m * m, psi.size() / (m * m));
  rho *= psi.weight();
  return DensityMatrix(std::move(rho), psi.grid.cell_volume() * psi.grid.cell_volume());
}

}  // namespace bmf
