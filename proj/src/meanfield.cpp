#include "bmf/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "bmf/fft.hpp"

namespace bmf {

void SchemeParams::validate(double L_norm_bound) const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (dt > 0.1) throw std::invalid_argument("dt must not exceed 0.1");
  if (dt * L_norm_bound * L_norm_bound > 0.5)
    throw std::invalid_argument("dt * ||L||^2 exceeds the stability guard 0.5");
}

XiPath XiPath::constant(const RealGridFunction& xi, double dt, std::size_t steps) {
  XiPath p;
  p.dt = dt;
  p.values.assign(steps + 1, xi);
  return p;
}

const RealGridFunction& XiPath::at_step(std::size_t k) const {
  if (k >= values.size()) throw std::out_of_range("XiPath: step beyond final time");
  return values[k];
}

void XiPath::validate(const Tolerances& tol) const {
  if (values.empty() || !(dt > 0.0)) throw std::invalid_argument("XiPath: empty path");
  for (const auto& v : values) require_density(v, tol);
}

double xi_distance(const XiPath& a, const XiPath& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("xi_distance: length mismatch");
  double m = 0.0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const auto& x = a.values[k];
    const auto& y = b.values[k];
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += std::abs(x.values[i] - y.values[i]);
    m = std::max(m, x.grid.cell_volume() * s);
  }
  return m;
}

RealGridFunction hartree_potential(const PotentialSpec& V, const RealGridFunction& xi) {
  if (V.is_zero()) return RealGridFunction(xi.grid);
  return convolve_potential(V.samples, xi);
}

namespace {

std::vector<cplx> potential_phase(const RealGridFunction& W, double dt) {
  std::vector<cplx> ph(W.size());
  for (std::size_t i = 0; i < W.size(); ++i) ph[i] = std::polar(1.0, -dt * W.values[i]);
  return ph;
}

// Shared machinery for single-particle Strang steps.
class SplitStep {
 public:
  SplitStep(const GridSpec& g, double dt, const CouplingOperator& L)
      : grid_(g), dt_(dt), L_(L), plan_(fft_plan(g.dim, g.n)), half_(g.size()), lx_(g.size()),
        llx_(g.size()) {
    const auto k2 = squared_wavenumbers(g.n, g.box_length, g.dim);
    const double inv = 1.0 / static_cast<double>(g.size());
    for (std::size_t i = 0; i < k2.size(); ++i) half_[i] = std::polar(inv, -0.5 * dt * k2[i]);
  }

  void kinetic_half(std::vector<cplx>& v) const {
    plan_.forward(v);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= half_[i];
    plan_.backward(v);
  }

  void potential(std::vector<cplx>& v, const std::vector<cplx>& phase) const {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= phase[i];
  }

  void coupling(std::vector<cplx>& v, double dW, double theta) {
    if (L_.is_zero()) return;
    L_.apply(v, lx_);
    L_.apply(lx_, llx_, true);
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      s += v[i].real() * lx_[i].real() + v[i].imag() * lx_[i].imag();
    const double m = grid_.cell_volume() * s;
    const double a = 0.5 * theta * theta * dt_;
    const double b = theta * dW;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const cplx f1 = llx_[i] - 2.0 * m * lx_[i] + m * m * v[i];
      const cplx f2 = lx_[i] - m * v[i];
      v[i] += -a * f1 + b * f2;
    }
  }

  // Full step; returns the norm before renormalization.
  double step(std::vector<cplx>& v, const std::vector<cplx>& phase, double dW, double theta,
              bool renormalize) {
    kinetic_half(v);
    potential(v, phase);
    coupling(v, dW, theta);
    kinetic_half(v);
    double s = 0.0;
    for (auto z : v) s += std::norm(z);
    const double nrm = std::sqrt(grid_.cell_volume() * s);
    if (renormalize) {
      if (!(nrm > 0.0)) return nrm;
      for (auto& z : v) z /= nrm;
    }
    return nrm;
  }

 private:
  GridSpec grid_;
  double dt_;
  const CouplingOperator& L_;
  const FftPlan& plan_;
  std::vector<cplx> half_;
  std::vector<cplx> lx_;
  std::vector<cplx> llx_;
};

bool finite(const std::vector<cplx>& v) {
  for (auto z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

void check_physics(const GridSpec& g, const SchemeParams& params, const Physics& phys) {
  params.validate(phys.L.norm_bound());
  if (!(phys.L.grid() == g)) throw std::invalid_argument("coupling operator grid mismatch");
  if (!phys.V.is_zero() && !(phys.V.samples.grid == g))
    throw std::invalid_argument("potential grid mismatch");
}

struct RunOutput {
  Trajectory traj;
  std::vector<double> density;  // (K+1) x size, |u|^2 at every knot
};

// Integrates one trajectory through precomputed Hartree phases.
void run_trajectory(const WaveFunction& u0, const std::vector<std::vector<cplx>>& phases,
                    const IncrementFn& dW, const SchemeParams& params, const Physics& phys,
                    const SolveOptions& opts, RunOutput& out, bool want_density) {
  const auto& g = u0.grid;
  const std::size_t K = phases.size();
  const std::size_t stride = std::max<std::size_t>(1, opts.sample_stride);
  SplitStep stepper(g, params.dt, phys.L);
  std::vector<cplx> v = u0.values;

  auto& tr = out.traj;
  tr = Trajectory{};
  if (want_density) out.density.assign((K + 1) * g.size(), 0.0);

  auto record = [&](std::size_t k, double drift) {
    if (want_density)
      for (std::size_t i = 0; i < v.size(); ++i) out.density[k * g.size() + i] = std::norm(v[i]);
    if (k % stride != 0 && k != K) return;
    tr.times.push_back(params.dt * static_cast<double>(k));
    tr.norm_drift.push_back(drift);
    WaveFunction w(g, v);
    if (opts.record_h1) tr.h1_series.push_back(h1_norm(w));
    if (opts.keep_states) tr.states.push_back(std::move(w));
  };

  double running_sup = l2_norm(u0);
  record(0, std::abs(running_sup - 1.0));
  for (std::size_t k = 0; k < K; ++k) {
    const double theta = opts.profile ? opts.profile->theta_R(running_sup) : 1.0;
    const double nrm = stepper.step(v, phases[k], dW(k), theta, params.renormalize);
    if (!finite(v) || !(nrm > 0.0)) throw NumericalAbort("non-finite state", k);
    const double drift = std::abs(nrm - 1.0);
    tr.max_norm_drift = std::max(tr.max_norm_drift, drift);
    running_sup = std::max(running_sup, params.renormalize ? 1.0 : nrm);
    record(k + 1, drift);
  }
}

std::vector<std::vector<cplx>> phases_for(const XiPath& xi, std::size_t K, const PotentialSpec& V,
                                          double dt) {
  std::vector<std::vector<cplx>> ph(K);
  for (std::size_t k = 0; k < K; ++k) ph[k] = potential_phase(hartree_potential(V, xi.at_step(k)), dt);
  return ph;
}

}  // namespace

WaveFunction step_intermediate(const WaveFunction& u, const RealGridFunction& xi_t, double dW,
                               const SchemeParams& params, const CouplingOperator& L,
                               const PotentialSpec& V, const TruncationProfile* profile,
                               double running_sup, StepInfo* info) {
  params.validate(L.norm_bound());
  if (!(xi_t.grid == u.grid)) throw std::invalid_argument("step_intermediate: grid mismatch");
  if (!u.all_finite()) throw NumericalAbort("non-finite input state", 0);
  SplitStep stepper(u.grid, params.dt, L);
  const auto phase = potential_phase(hartree_potential(V, xi_t), params.dt);
  const double theta = profile ? profile->theta_R(running_sup) : 1.0;
  std::vector<cplx> v = u.values;
  const double nrm = stepper.step(v, phase, dW, theta, params.renormalize);
  if (!finite(v)) throw NumericalAbort("non-finite state", 0);
  if (info) *info = StepInfo{nrm, theta};
  return WaveFunction(u.grid, std::move(v));
}

Trajectory solve_intermediate(const WaveFunction& u0, const XiPath& xi, const IncrementFn& dW,
                              const SchemeParams& params, const Physics& phys,
                              const SolveOptions& opts) {
  check_physics(u0.grid, params, phys);
  require_normalized(u0);
  xi.validate();
  if (std::abs(xi.dt - params.dt) > 1e-15 * params.dt)
    throw std::invalid_argument("XiPath knot spacing differs from dt");
  const std::size_t K = xi.steps();
  RunOutput out;
  run_trajectory(u0, phases_for(xi, K, phys.V, params.dt), dW, params, phys, opts, out, false);
  return std::move(out.traj);
}

std::size_t MeanFieldConfig::steps() const {
  const double k = T / scheme.dt;
  const auto K = static_cast<std::size_t>(std::llround(k));
  if (K == 0 || std::abs(k - static_cast<double>(K)) > 1e-9 * k)
    throw std::invalid_argument("T must be a positive multiple of dt");
  return K;
}

namespace {

constexpr std::size_t kBlock = 64;

void check_cfg(const MeanFieldConfig& cfg) {
  if (cfg.M < 1) throw std::invalid_argument("ensemble size M must be >= 1");
  if (cfg.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(cfg.picard_tol > 0.0)) throw std::invalid_argument("picard_tol must be positive");
}

std::vector<WaveFunction> initial_states(const InitialSampler& u0, std::size_t M) {
  std::vector<WaveFunction> s;
  s.reserve(M);
  for (std::size_t m = 0; m < M; ++m) {
    s.push_back(u0(m));
    require_normalized(s.back());
  }
  return s;
}

XiPath initial_xi(const std::vector<WaveFunction>& u0, double dt, std::size_t K) {
  const auto& g = u0.front().grid;
  RealGridFunction xi(g);
  for (const auto& u : u0)
    for (std::size_t i = 0; i < g.size(); ++i) xi.values[i] += std::norm(u.values[i]);
  for (auto& v : xi.values) v /= static_cast<double>(u0.size());
  return XiPath::constant(xi, dt, K);
}

}  // namespace

MeanFieldResult picard_meanfield(const InitialSampler& u0, const Physics& phys,
                                 const MeanFieldConfig& cfg) {
  check_cfg(cfg);
  const std::size_t K = cfg.steps();
  const auto init = initial_states(u0, cfg.M);
  const auto& g = init.front().grid;
  check_physics(g, cfg.scheme, phys);
  const BrownianDriver driver(cfg.seed, cfg.scheme.dt, cfg.family);
  SolveOptions opts;
  opts.sample_stride = cfg.sample_stride;
  opts.keep_states = cfg.keep_trajectories;
  opts.record_h1 = cfg.keep_trajectories;

  MeanFieldResult res;
  XiPath xi = initial_xi(init, cfg.scheme.dt, K);
  res.converged = false;
  for (int it = 0; it < cfg.max_iters; ++it) {
    const auto phases = phases_for(xi, K, phys.V, cfg.scheme.dt);
    std::vector<double> total((K + 1) * g.size(), 0.0);
    std::vector<Trajectory> trajs(cfg.keep_trajectories ? cfg.M : 0);
    for (std::size_t start = 0; start < cfg.M; start += kBlock) {
      const std::size_t bs = std::min(kBlock, cfg.M - start);
      std::vector<RunOutput> outs(bs);
      std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
      for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(bs); ++b) {
        const std::size_t m = start + static_cast<std::size_t>(b);
        try {
          IncrementFn inc = [&driver, m](std::size_t k) { return driver.increment(m, 0, k); };
          run_trajectory(init[m], phases, inc, cfg.scheme, phys, opts, outs[static_cast<std::size_t>(b)], true);
        } catch (...) {
#pragma omp critical
          if (!err) err = std::current_exception();
        }
      }
      if (err) std::rethrow_exception(err);
      for (std::size_t b = 0; b < bs; ++b) {
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += outs[b].density[i];
        if (cfg.keep_trajectories) trajs[start + b] = std::move(outs[b].traj);
      }
    }
    XiPath next;
    next.dt = cfg.scheme.dt;
    next.values.assign(K + 1, RealGridFunction(g));
    const double invM = 1.0 / static_cast<double>(cfg.M);
    for (std::size_t k = 0; k <= K; ++k)
      for (std::size_t i = 0; i < g.size(); ++i)
        next.values[k].values[i] = total[k * g.size() + i] * invM;

    const double r = xi_distance(next, xi);
    res.residuals.push_back(r);
    res.xi = std::move(xi);
    res.trajectories = std::move(trajs);
    if (r < cfg.picard_tol) {
      res.converged = true;
      break;
    }
    xi = std::move(next);
  }
  return res;
}

MeanFieldResult ensemble_meanfield(const InitialSampler& u0, const Physics& phys,
                                   const MeanFieldConfig& cfg) {
  check_cfg(cfg);
  const std::size_t K = cfg.steps();
  auto init = initial_states(u0, cfg.M);
  const auto& g = init.front().grid;
  check_physics(g, cfg.scheme, phys);
  const BrownianDriver driver(cfg.seed, cfg.scheme.dt, cfg.family);
  const std::size_t stride = std::max<std::size_t>(1, cfg.sample_stride);

  MeanFieldResult res;
  res.xi.dt = cfg.scheme.dt;
  res.trajectories.assign(cfg.keep_trajectories ? cfg.M : 0, Trajectory{});
  std::vector<std::vector<cplx>> v(cfg.M);
  for (std::size_t m = 0; m < cfg.M; ++m) v[m] = init[m].values;
  std::vector<double> drift(cfg.M, 0.0);

  auto empirical = [&]() {
    RealGridFunction xi(g);
    for (std::size_t m = 0; m < cfg.M; ++m)
      for (std::size_t i = 0; i < g.size(); ++i) xi.values[i] += std::norm(v[m][i]);
    for (auto& x : xi.values) x /= static_cast<double>(cfg.M);
    return xi;
  };
  auto record = [&](std::size_t k) {
    if (!cfg.keep_trajectories || (k % stride != 0 && k != K)) return;
    for (std::size_t m = 0; m < cfg.M; ++m) {
      auto& tr = res.trajectories[m];
      WaveFunction w(g, v[m]);
      tr.times.push_back(cfg.scheme.dt * static_cast<double>(k));
      tr.norm_drift.push_back(drift[m]);
      tr.h1_series.push_back(h1_norm(w));
      tr.states.push_back(std::move(w));
    }
  };

  std::vector<double> max_drift(cfg.M, 0.0);
  for (std::size_t m = 0; m < cfg.M; ++m) drift[m] = std::abs(l2_norm(init[m]) - 1.0);
  record(0);
  for (std::size_t k = 0; k < K; ++k) {
    res.xi.values.push_back(empirical());
    const auto phase = potential_phase(hartree_potential(phys.V, res.xi.values.back()), cfg.scheme.dt);
    std::exception_ptr err;
#pragma omp parallel
    {
      SplitStep stepper(g, cfg.scheme.dt, phys.L);
#pragma omp for schedule(static)
      for (std::ptrdiff_t ms = 0; ms < static_cast<std::ptrdiff_t>(cfg.M); ++ms) {
        const auto m = static_cast<std::size_t>(ms);
        const double nrm = stepper.step(v[m], phase, driver.increment(m, 0, k), 1.0, cfg.scheme.renormalize);
        drift[m] = std::abs(nrm - 1.0);
        max_drift[m] = std::max(max_drift[m], drift[m]);
        if (!finite(v[m]) || !(nrm > 0.0)) {
#pragma omp critical
          if (!err) err = std::make_exception_ptr(NumericalAbort("non-finite state", k));
        }
      }
    }
    if (err) std::rethrow_exception(err);
    record(k + 1);
  }
  res.xi.values.push_back(empirical());
  for (std::size_t m = 0; m < res.trajectories.size(); ++m) res.trajectories[m].max_norm_drift = max_drift[m];
  return res;
}

DensityPath evolve_belavkin_density(const DensityMatrix& p0, const GridSpec& grid, const XiPath& xi,
                                    const IncrementFn& dW, const SchemeParams& params,
                                    const Physics& phys, std::size_t sample_stride) {
  const std::size_t m = grid.size();
  if (m > CouplingOperator::max_dense_size)
    throw std::invalid_argument("density evolution limited to 64 grid points");
  if (p0.dim() != m) throw std::invalid_argument("density dimension mismatch");
  check_physics(grid, params, phys);
  p0.require_state();
  const double dt = params.dt;
  const std::size_t K = xi.steps();
  const std::size_t stride = std::max<std::size_t>(1, sample_stride);

  Matrix U(m, m);
  {
    WaveFunction e(grid);
    for (std::size_t j = 0; j < m; ++j) {
      e.values.assign(m, 0.0);
      e.values[j] = 1.0;
      const auto col = free_propagate(e, 0.5 * dt);
      for (std::size_t i = 0; i < m; ++i) U(i, j) = col.values[i];
    }
  }
  const Matrix Ud = U.adjoint();
  const Matrix L = phys.L.to_dense();
  const Matrix Ld = L.adjoint();
  const Matrix LdL = Ld * L;
  const bool coupled = !phys.L.is_zero();

  DensityPath path;
  Matrix P = p0.entries;
  auto record = [&](std::size_t k) {
    if (k % stride != 0 && k != K) return;
    path.times.push_back(dt * static_cast<double>(k));
    path.states.emplace_back(P, p0.quadrature_weight);
    path.traces.push_back(P.trace().real());
  };
  record(0);
  for (std::size_t k = 0; k < K; ++k) {
    P = U * P * Ud;
    const auto phase = potential_phase(hartree_potential(phys.V, xi.at_step(k)), dt);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) P(i, j) *= phase[i] * std::conj(phase[j]);
    if (coupled) {
      const double w = dW(k);
      const Matrix LP = L * P;
      const Matrix PLd = P * Ld;
      const double tau = 2.0 * LP.trace().real();
      Matrix next = P;
      next += (dt * (LP * Ld - 0.5 * (LdL * P + P * LdL)));
      next += (w * (LP + PLd - tau * P));
      P = hermitian_part(next);
    }
    P = U * P * Ud;
    for (auto z : P.data())
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw NumericalAbort("non-finite density", k);
    if (std::abs(P.trace().real() - 1.0) > 0.1) throw NumericalAbort("density trace drifted beyond 0.1", k);
    record(k + 1);
  }
  return path;
}

std::vector<double> h1_moment_series(const std::vector<Trajectory>& ensemble, int p) {
  if (p < 4 || p % 2 != 0) throw std::invalid_argument("moment order must be even and >= 4");
  if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
  const std::size_t n = ensemble.front().h1_series.size();
  std::vector<double> out(n, 0.0);
  for (const auto& tr : ensemble) {
    if (tr.h1_series.size() != n) throw std::invalid_argument("ragged H1 series");
    for (std::size_t i = 0; i < n; ++i) out[i] += std::pow(tr.h1_series[i], p);
  }
  for (auto& v : out) v /= static_cast<double>(ensemble.size());
  return out;
}

}  // namespace bmf
