#include "bmf/oplab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "bmf/fft.hpp"
#include "bmf/indicators.hpp"
#include "bmf/nbody.hpp"

namespace bmf {

LabOperator::LabOperator(Matrix a) : a_(std::move(a)) {
  if (!a_.square() || a_.rows() == 0 || a_.rows() > max_lab_dim)
    throw std::invalid_argument("LabOperator: dimension must be 1..64");
  const auto sv = singular_values(a_);
  op_ = sv.front();
  tr_ = 0.0;
  for (double s : sv) tr_ += s;
  hs_ = frobenius_norm(a_);
}

bool LabOperator::norm_chain_holds(double rel_tol) const {
  const double slack = rel_tol * std::max(1.0, tr_);
  return op_ <= hs_ + slack && hs_ <= tr_ + slack;
}

namespace {

Matrix ginibre(std::size_t m, CounterStream& rng) {
  Matrix g(m, m);
  const double s = 1.0 / std::numbers::sqrt2;
  for (auto& z : g.data()) {
    const double re = rng.normal();
    const double im = rng.normal();
    z = cplx(s * re, s * im);
  }
  return g;
}

void require_lab_dim(std::size_t m) {
  if (m < 2 || m > max_lab_dim) throw std::invalid_argument("lab dimension must be in [2, 64]");
}

}  // namespace

LabOperator random_density(std::size_t m, CounterStream& rng) {
  require_lab_dim(m);
  const Matrix g = ginibre(m, rng);
  Matrix rho = g * g.adjoint();
  rho *= 1.0 / rho.trace().real();
  return LabOperator(hermitian_part(rho));
}

LabOperator random_rank1_projector(std::size_t m, CounterStream& rng) {
  require_lab_dim(m);
  std::vector<cplx> v(m);
  double n2 = 0.0;
  for (auto& z : v) {
    const double re = rng.normal();
    const double im = rng.normal();
    z = cplx(re, im);
    n2 += std::norm(z);
  }
  for (auto& z : v) z /= std::sqrt(n2);
  return LabOperator(Matrix::outer(v, v));
}

LabOperator random_bounded(std::size_t m, CounterStream& rng, double cap) {
  require_lab_dim(m);
  if (!(cap > 0.0)) throw std::invalid_argument("random_bounded: cap must be positive");
  Matrix g = ginibre(m, rng);
  const double scale = cap * rng.uniform() / operator_norm(g);
  g *= scale;
  return LabOperator(std::move(g));
}

LabOperator random_density(std::size_t m, std::uint64_t seed) {
  CounterStream rng(seed, 0);
  return random_density(m, rng);
}

LabOperator random_rank1_projector(std::size_t m, std::uint64_t seed) {
  CounterStream rng(seed, 0);
  return random_rank1_projector(m, rng);
}

LabOperator random_bounded(std::size_t m, std::uint64_t seed, double cap) {
  CounterStream rng(seed, 0);
  return random_bounded(m, rng, cap);
}

double check_prodproj(const Matrix& A, const Matrix& B, const Matrix& p) {
  const Matrix Ap = A * p;
  const Matrix Bp = B * p;
  return std::abs((Ap * Bp).trace() - Ap.trace() * Bp.trace());
}

double check_hs_bound(const Matrix& rho, const Matrix& A) {
  const Matrix rA = rho * A;
  const double lhs = std::pow(frobenius_norm(rA), 2);
  const double rhs = rho.trace().real() * (A.adjoint() * rA).trace().real();
  return rhs - lhs;
}

double kolokoltsov_constant(KolokoltsovMode mode) {
  return mode == KolokoltsovMode::selfadjoint ? 4.0 + 8.0 * std::numbers::sqrt2 : 32.0;
}

KolokoltsovResult check_kolokoltsov(const Matrix& Lin, const Matrix& p, const Matrix& rho,
                                    KolokoltsovMode mode) {
  KolokoltsovResult r;
  const Matrix L = mode == KolokoltsovMode::selfadjoint ? hermitian_part(Lin) : Lin;
  const Matrix Ld = L.adjoint();
  auto tr = [](const Matrix& a) { return a.trace(); };
  const Matrix Lr = L * rho, Lp = L * p, rp = rho * p;
  cplx v;
  if (mode == KolokoltsovMode::selfadjoint) {
    const cplx t_LrLp = tr(Lr * Lp);
    const cplx t_rLp = tr(rho * Lp);
    const cplx t_Lrp = tr(Lr * p);
    const cplx t_Lr = tr(Lr), t_Lp = tr(Lp), t_rp = tr(rp);
    v = -4.0 * t_LrLp + 2.0 * (t_rLp + t_Lrp) * (t_Lr + t_Lp) - 4.0 * t_rp * t_Lp * t_Lr;
  } else {
    const Matrix S = L + Ld;
    const Matrix pL = p * L, pLd = p * Ld;
    const cplx quad = tr(pL * rho * Ld) + tr(pLd * rho * L) + tr(pL * rho * L) + tr(pLd * rho * Ld);
    const cplx t_rp = tr(rp);
    const cplx t_rS = tr(rho * S), t_pS = tr(p * S);
    const cplx a = tr(p * rho * Ld) + tr(pL * rho);
    const cplx b = tr(p * rho * L) + tr(pLd * rho);
    v = -quad - t_rp * t_rS * t_pS + a * t_pS + b * t_rS;
  }
  r.lhs = std::abs(v);
  r.alpha = 1.0 - tr(rp).real();
  r.L_norm = operator_norm(L);
  r.bound = kolokoltsov_constant(mode) * r.L_norm * r.L_norm * r.alpha;
  r.pass = r.lhs <= r.bound + 1e-9;
  return r;
}

double check_scalar_sde(const std::function<double(double, double)>& C, std::uint64_t seed, double dt,
                        double T, double M0) {
  const BrownianDriver drv(seed, dt, StreamFamily::lab);
  const auto K = static_cast<std::size_t>(std::llround(T / dt));
  double M = M0;
  double worst = std::abs(M - 1.0);
  for (std::size_t k = 0; k < K; ++k) {
    const double t = dt * static_cast<double>(k);
    M = M + C(t, M) * (M - 1.0) * drv.increment(0, 0, k);
    worst = std::max(worst, std::abs(M - 1.0));
  }
  return worst;
}

namespace {

std::size_t steps_for(double T, double dt) {
  const double k = T / dt;
  const auto K = static_cast<std::size_t>(std::llround(k));
  if (K == 0 || std::abs(k - static_cast<double>(K)) > 1e-9 * k)
    throw std::invalid_argument("T must be a positive multiple of dt");
  return K;
}

XiPath frozen_xi(const WaveFunction& phi0, double dt, std::size_t K) {
  return XiPath::constant(density_of(phi0), dt, K);
}

Matrix kron_axis(const Matrix& A, std::size_t m, std::size_t N, std::size_t j) {
  const std::size_t D = static_cast<std::size_t>(std::llround(std::pow(m, N)));
  const std::size_t inner = static_cast<std::size_t>(std::llround(std::pow(m, N - 1 - j)));
  Matrix out(D, D);
  for (std::size_t r = 0; r < D; ++r) {
    const std::size_t xr = (r / inner) % m;
    for (std::size_t xc = 0; xc < m; ++xc) {
      const std::size_t c = r + (xc - xr) * inner;  // same indices on other axes
      out(r, c) = A(xr, xc);
    }
  }
  return out;
}

StrongErrorReport finish(StrongErrorReport rep) {
  rep.ratio = rep.errors[0] > 0.0 ? rep.errors[1] / rep.errors[0] : 0.0;
  return rep;
}

}  // namespace

StrongErrorReport crosscheck_meanfield_density(const CrossCheckSetup& s) {
  if (s.grid.size() > CouplingOperator::max_dense_size)
    throw std::invalid_argument("cross-check limited to 64 grid points");
  const BrownianDriver drv(s.seed, s.dt / 4.0, StreamFamily::trajectory);
  StrongErrorReport rep;
  for (std::uint32_t factor : {4u, 1u}) {
    SchemeParams params;
    params.dt = s.dt * factor / 4.0;
    const std::size_t K = steps_for(s.T, params.dt);
    const XiPath xi = frozen_xi(s.phi0, params.dt, K);
    double err = 0.0;
    for (std::size_t path = 0; path < s.paths; ++path) {
      IncrementFn inc = [&, path, factor](std::size_t k) { return drv.coarse_increment(path, 0, k, factor); };
      SolveOptions opts;
      opts.sample_stride = K;
      opts.record_h1 = false;
      const auto tr = solve_intermediate(s.phi0, xi, inc, params, s.phys, opts);
      const auto dp = evolve_belavkin_density(DensityMatrix::pure(s.phi0), s.grid, xi, inc, params, s.phys, K);
      for (double t : dp.traces) rep.max_trace_deviation = std::max(rep.max_trace_deviation, std::abs(t - 1.0));
      err += trace_distance(dp.states.back(), DensityMatrix::pure(tr.states.back()));
    }
    rep.dts.push_back(params.dt);
    rep.errors.push_back(err / static_cast<double>(s.paths));
  }
  return finish(rep);
}

StrongErrorReport crosscheck_nbody_density(const CrossCheckSetup& s) {
  const std::size_t N = s.n_particles;
  const std::size_t m = s.grid.size();
  const std::size_t D = tensor_size(m, N);
  if (D > CouplingOperator::max_dense_size) throw std::invalid_argument("N-body density cross-check limited to 64 states");
  const auto& g = s.grid;
  const BrownianDriver drv(s.seed, s.dt / 4.0, StreamFamily::trajectory);

  const Matrix L1 = s.phys.L.to_dense();
  std::vector<Matrix> Lj, Ljd, LdL;
  for (std::size_t j = 0; j < N; ++j) {
    Lj.push_back(kron_axis(L1, m, N, j));
    Ljd.push_back(Lj.back().adjoint());
    LdL.push_back(Ljd.back() * Lj.back());
  }
  // Pair interaction (1/N) sum_{a<b} V(x_a - x_b) on the tensor grid.
  std::vector<double> Vint(D, 0.0);
  if (N >= 2 && !s.phys.V.is_zero()) {
    for (std::size_t flat = 0; flat < D; ++flat) {
      std::vector<std::size_t> idx(N);
      std::size_t rest = flat;
      for (std::size_t a = N; a-- > 0;) {
        idx[a] = rest % m;
        rest /= m;
      }
      double acc = 0.0;
      for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b) {
          const auto xa = g.unravel(idx[a]), xb = g.unravel(idx[b]);
          std::array<std::size_t, 3> d{0, 0, 0};
          for (int ax = 0; ax < g.dim; ++ax) {
            const auto u = static_cast<std::size_t>(ax);
            d[u] = (xa[u] + g.n - xb[u]) % g.n;
          }
          acc += s.phys.V.samples.values[g.ravel(d)];
        }
      Vint[flat] = acc / static_cast<double>(N);
    }
  }

  StrongErrorReport rep;
  for (std::uint32_t factor : {4u, 1u}) {
    SchemeParams params;
    params.dt = s.dt * factor / 4.0;
    const std::size_t K = steps_for(s.T, params.dt);
    // Half-step kinetic propagator as a matrix on the tensor grid.
    Matrix U(D, D);
    {
      const auto& plan = fft_plan(static_cast<int>(g.dim * N), g.n);
      const auto k2 = squared_wavenumbers(g.n, g.box_length, static_cast<int>(g.dim * N));
      std::vector<cplx> e(D);
      for (std::size_t c = 0; c < D; ++c) {
        std::fill(e.begin(), e.end(), cplx(0.0));
        e[c] = 1.0;
        plan.forward(e);
        for (std::size_t i = 0; i < D; ++i) e[i] *= std::polar(1.0 / static_cast<double>(D), -0.5 * params.dt * k2[i]);
        plan.backward(e);
        for (std::size_t r = 0; r < D; ++r) U(r, c) = e[r];
      }
    }
    const Matrix Ud = U.adjoint();
    std::vector<cplx> phase(D);
    for (std::size_t i = 0; i < D; ++i) phase[i] = std::polar(1.0, -params.dt * Vint[i]);
    const NBodyStepper stepper(g, N, params, s.phys, 1024, false);

    double err = 0.0;
    for (std::size_t path = 0; path < s.paths; ++path) {
      auto inc = [&, path, factor](std::uint32_t j, std::size_t k) { return drv.coarse_increment(path, j, k, factor); };
      auto psi = WaveFunctionNP::tensor_power(s.phi0, N);
      Matrix P = DensityMatrix::pure(psi.values, psi.weight()).entries;
      for (std::size_t k = 0; k < K; ++k) {
        P = U * P * Ud;
        for (std::size_t a = 0; a < D; ++a)
          for (std::size_t b = 0; b < D; ++b) P(a, b) *= phase[a] * std::conj(phase[b]);
        Matrix next = P;
        for (std::size_t j = 0; j < N; ++j) {
          if (s.phys.L.is_zero()) break;
          const double w = inc(static_cast<std::uint32_t>(j), k);
          const Matrix LP = Lj[j] * P;
          const Matrix PLd = P * Ljd[j];
          const double tau = 2.0 * LP.trace().real();
          next += params.dt * (LP * Ljd[j] - 0.5 * (LdL[j] * P + P * LdL[j]));
          next += w * (LP + PLd - tau * P);
        }
        P = U * hermitian_part(next) * Ud;
        rep.max_trace_deviation = std::max(rep.max_trace_deviation, std::abs(P.trace().real() - 1.0));
      }
      stepper.evolve(psi, 0, K, inc);
      err += trace_distance(DensityMatrix(P, psi.weight()), DensityMatrix::pure(psi.values, psi.weight()));
    }
    rep.dts.push_back(params.dt);
    rep.errors.push_back(err / static_cast<double>(s.paths));
  }
  return finish(rep);
}

StrongErrorReport meanfield_strong_error(const CrossCheckSetup& s, std::uint32_t reference_factor) {
  if (reference_factor < 4 || reference_factor % 4 != 0)
    throw std::invalid_argument("reference factor must be a multiple of 4");
  const double dt_ref = s.dt / reference_factor;
  const BrownianDriver drv(s.seed, dt_ref, StreamFamily::trajectory);
  SchemeParams ref_params;
  ref_params.dt = dt_ref;
  const std::size_t K_ref = steps_for(s.T, dt_ref);
  const XiPath xi_ref = frozen_xi(s.phi0, dt_ref, K_ref);
  SolveOptions opts;
  opts.record_h1 = false;

  std::vector<WaveFunction> refs;
  for (std::size_t path = 0; path < s.paths; ++path) {
    IncrementFn inc = [&, path](std::size_t k) { return drv.increment(path, 0, k); };
    opts.sample_stride = K_ref;
    refs.push_back(solve_intermediate(s.phi0, xi_ref, inc, ref_params, s.phys, opts).states.back());
  }
  StrongErrorReport rep;
  for (std::uint32_t factor : {reference_factor, reference_factor / 4}) {
    SchemeParams params;
    params.dt = dt_ref * factor;
    const std::size_t K = steps_for(s.T, params.dt);
    const XiPath xi = frozen_xi(s.phi0, params.dt, K);
    opts.sample_stride = K;
    double err = 0.0;
    for (std::size_t path = 0; path < s.paths; ++path) {
      IncrementFn inc = [&, path, factor](std::size_t k) { return drv.coarse_increment(path, 0, k, factor); };
      const auto u = solve_intermediate(s.phi0, xi, inc, params, s.phys, opts).states.back();
      WaveFunction d(u.grid);
      for (std::size_t i = 0; i < d.size(); ++i) d.values[i] = u.values[i] - refs[path].values[i];
      err += l2_norm(d);
    }
    rep.dts.push_back(params.dt);
    rep.errors.push_back(err / static_cast<double>(s.paths));
  }
  return finish(rep);
}

// ---------------------------------------------------------------------------
// Randomized property suite

namespace {

struct Outcome {
  double ratio = 0.0;
  bool fail = false;
  double sharp = 0.0;
  std::size_t chain_ops = 0;
  std::size_t chain_fail = 0;
};

struct Tally {
  std::size_t ops = 0;
  std::size_t fails = 0;
  double worst = 0.0;
};

CounterStream sample_stream(std::uint64_t seed, std::uint32_t check, std::size_t i) {
  if (i >= (std::size_t{1} << 24)) throw std::invalid_argument("too many samples for one check");
  return CounterStream(seed, (check << 24) | static_cast<std::uint32_t>(i));
}

template <class F>
CheckReport run_check(const std::string& name, std::size_t n, Tally& chain, F f) {
  CheckReport rep;
  rep.check_name = name;
  rep.samples = n;
  double worst = 0.0, sharp = 0.0, chain_worst = 0.0;
  std::size_t fails = 0, chain_ops = 0, chain_fails = 0;
#pragma omp parallel for schedule(dynamic, 64) reduction(max : worst, sharp, chain_worst) \
    reduction(+ : fails, chain_ops, chain_fails)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    const Outcome o = f(static_cast<std::size_t>(i));
    worst = std::max(worst, o.ratio);
    sharp = std::max(sharp, o.sharp);
    fails += o.fail ? 1 : 0;
    chain_ops += o.chain_ops;
    chain_fails += o.chain_fail;
  }
  rep.failures = fails;
  rep.worst_ratio = worst;
  if (sharp > 0.0) rep.sharp_constant = sharp;
  chain.ops += chain_ops;
  chain.fails += chain_fails;
  chain.worst = std::max(chain.worst, chain_worst);
  return rep;
}

void note_chain(Outcome& o, std::initializer_list<const LabOperator*> ops) {
  for (const auto* op : ops) {
    ++o.chain_ops;
    if (!op->norm_chain_holds()) ++o.chain_fail;
  }
}

// Ratio lhs / bound with a tiny absolute floor so that 0 <= 0 passes.
void bound_outcome(Outcome& o, double lhs, double bound, double abs_tol = 1e-12) {
  o.ratio = std::max(o.ratio, bound > 0.0 ? lhs / bound : (lhs > abs_tol ? INFINITY : 0.0));
  if (lhs > bound * (1.0 + 1e-12) + abs_tol) o.fail = true;
}

// Random function with Fourier support |k| <= band, scaled to L2 norm `norm`.
WaveFunction band_limited(const GridSpec& g, CounterStream& rng, int band, double norm) {
  WaveFunction u(g);
  const auto n = static_cast<long>(g.n);
  for (long k = -band; k <= band; ++k) {
    const auto idx = static_cast<std::size_t>((k + n) % n);
    const double re = rng.normal();
    const double im = rng.normal();
    u.values[idx] = cplx(re, im);
  }
  fft_plan(g.dim, g.n).backward(u.values);
  const double s = norm / l2_norm(u);
  for (auto& z : u.values) z *= s;
  return u;
}

WaveFunction difference(const WaveFunction& a, const WaveFunction& b) {
  WaveFunction d(a.grid);
  for (std::size_t i = 0; i < d.size(); ++i) d.values[i] = a.values[i] - b.values[i];
  return d;
}

struct NonlinearitySample {
  CouplingOperator L;
  double R;
  WaveFunction X, Y;
};

// Even samples: multiplication by a cosine on a 32-point grid; odd samples:
// a dense random operator on an 8-point grid.
NonlinearitySample nonlinearity_sample(CounterStream& rng, std::size_t i) {
  const double R = 1.0 + 2.0 * rng.uniform();
  if (i % 2 == 0) {
    const GridSpec g(1, 32, 20.0);
    const double A = 0.2 + 1.3 * rng.uniform();
    const int mode = 1 + static_cast<int>(3.0 * rng.uniform());
    auto L = CouplingOperator::cosine(g, A, mode);
    auto X = band_limited(g, rng, 6, 2.0 * R * rng.uniform());
    auto Y = band_limited(g, rng, 6, 2.0 * R * rng.uniform());
    return {std::move(L), R, std::move(X), std::move(Y)};
  }
  const GridSpec g(1, 8, 8.0);
  auto L = CouplingOperator::dense(g, random_bounded(8, rng, 1.5).matrix());
  auto X = band_limited(g, rng, 3, 2.0 * R * rng.uniform());
  auto Y = band_limited(g, rng, 3, 2.0 * R * rng.uniform());
  return {std::move(L), R, std::move(X), std::move(Y)};
}

enum CheckId : std::uint32_t {
  kProdProj = 1,
  kHs,
  kKolSa,
  kKolGen,
  kP3,
  kNonlinearity,
  kSde,
};

}  // namespace

std::vector<CheckReport> run_property_suite(const PropertySuiteConfig& cfg) {
  std::vector<CheckReport> out;
  Tally chain;
  const std::uint64_t seed = cfg.seed;

  out.push_back(run_check("projector_product_identity", cfg.prodproj_samples, chain, [&](std::size_t i) {
    auto rng = sample_stream(seed, kProdProj, i);
    Outcome o;
    const auto A = random_bounded(16, rng, 2.0);
    const auto B = random_bounded(16, rng, 2.0);
    const auto p = random_rank1_projector(16, rng);
    note_chain(o, {&A, &B, &p});
    const double dev = check_prodproj(A.matrix(), B.matrix(), p.matrix());
    const double tol = 1e-10 * (1.0 + A.operator_norm() * B.operator_norm());
    o.ratio = dev / tol;
    o.fail = dev > tol;
    return o;
  }));

  out.push_back(run_check("hilbert_schmidt_bound", cfg.hs_samples, chain, [&](std::size_t i) {
    auto rng = sample_stream(seed, kHs, i);
    Outcome o;
    const auto rho = random_density(8, rng);
    const auto A = random_bounded(8, rng, 2.0);
    note_chain(o, {&rho, &A});
    const double slack = check_hs_bound(rho.matrix(), A.matrix());
    o.ratio = slack < 0.0 ? -slack / 1e-10 : 0.0;
    o.fail = slack < -1e-10;
    return o;
  }));

  for (auto mode : {KolokoltsovMode::selfadjoint, KolokoltsovMode::general}) {
    const bool sa = mode == KolokoltsovMode::selfadjoint;
    out.push_back(run_check(sa ? "kolokoltsov_selfadjoint" : "kolokoltsov_general", cfg.kolokoltsov_samples, chain,
                            [&, mode, sa](std::size_t i) {
                              auto rng = sample_stream(seed, sa ? kKolSa : kKolGen, i);
                              Outcome o;
                              const std::size_t m = std::size_t{2} << (i % 4);
                              const auto L = random_bounded(m, rng, 2.0);
                              const auto p = random_rank1_projector(m, rng);
                              // Mix in near-pure states so that small alpha is exercised.
                              auto rho = random_density(m, rng);
                              Matrix r = rho.matrix();
                              if (i % 3 == 0) {
                                const double lam = rng.uniform();
                                r = (1.0 - lam) * p.matrix() + lam * lam * r;
                                r *= 1.0 / r.trace().real();
                              }
                              note_chain(o, {&L, &p, &rho});
                              const auto res = check_kolokoltsov(L.matrix(), p.matrix(), r, mode);
                              o.fail = !res.pass;
                              o.ratio = res.bound > 0.0 ? res.lhs / res.bound : (res.lhs > 1e-9 ? INFINITY : 0.0);
                              const double base = res.L_norm * res.L_norm * res.alpha;
                              if (base > 1e-8) o.sharp = res.lhs / base;
                              return o;
                            }));
  }

  out.push_back(run_check("martingale_coefficient_bound", cfg.p3_samples, chain, [&](std::size_t i) {
    auto rng = sample_stream(seed, kP3, i);
    Outcome o;
    const auto p = random_rank1_projector(8, rng);
    const auto rho = random_density(8, rng);
    const auto L = random_bounded(8, rng, 1.0);
    note_chain(o, {&p, &rho, &L});
    bound_outcome(o, std::abs(p3_coefficient(p.matrix(), rho.matrix(), L.matrix())), 4.0 * L.operator_norm(), 1e-9);
    return o;
  }));

  // Estimates for <L>, F1, F2 and their gradients on grid functions.
  struct NonlinearityCheck {
    const char* name;
    int id;
  };
  const NonlinearityCheck nonlinearity_checks[] = {
      {"average_bound", 0},  {"average_lipschitz", 1}, {"truncation_lipschitz", 2},
      {"f1_bound", 3},       {"f1_lipschitz", 4},      {"f2_bound", 5},
      {"f2_lipschitz", 6},   {"f1_gradient_bound", 7}, {"f2_gradient_bound", 8},
  };
  for (const auto& lc : nonlinearity_checks) {
    const int id = lc.id;
    // Gradient estimates need a multiplication operator: use even samples only.
    const std::size_t n = id >= 7 ? cfg.nonlinearity_samples / 2 : cfg.nonlinearity_samples;
    out.push_back(run_check(lc.name, n, chain, [&, id](std::size_t j) {
      const std::size_t i = id >= 7 ? 2 * j : j;
      auto rng = sample_stream(seed, kNonlinearity, i);
      Outcome o;
      const auto s = nonlinearity_sample(rng, i);
      const double R = s.R;
      const double nL = s.L.norm_bound();
      const double dxy = l2_norm(difference(s.X, s.Y));
      switch (id) {
        case 0:
          bound_outcome(o, std::abs(expect_L(s.L, s.X)), 4.0 * R * R * nL);
          break;
        case 1:
          bound_outcome(o, std::abs(expect_L(s.L, s.X) - expect_L(s.L, s.Y)), 4.0 * R * nL * dxy);
          break;
        case 2: {
          const TruncationProfile prof(R);
          const double a = 4.0 * R * rng.uniform(), b = 4.0 * R * rng.uniform();
          bound_outcome(o, std::abs(prof.theta_R(a) - prof.theta_R(b)),
                        TruncationProfile::theta_prime_sup / R * std::abs(a - b));
          break;
        }
        case 3:
          bound_outcome(o, l2_norm(apply_F1(s.L, s.X)), 2.0 * R * nL * nL * std::pow(1.0 + 4.0 * R * R, 2));
          break;
        case 4:
          bound_outcome(o, l2_norm(difference(apply_F1(s.L, s.X), apply_F1(s.L, s.Y))),
                        nL * nL * (1.0 + 24.0 * R * R + 80.0 * std::pow(R, 4)) * dxy);
          break;
        case 5:
          bound_outcome(o, l2_norm(apply_F2(s.L, s.X)), 2.0 * R * nL * (1.0 + 4.0 * R * R));
          break;
        case 6:
          bound_outcome(o, l2_norm(difference(apply_F2(s.L, s.X), apply_F2(s.L, s.Y))),
                        (1.0 + 12.0 * R * R) * nL * dxy);
          break;
        case 7: {
          const auto& c = *s.L.commutators();
          const double C = std::pow(1.0 + 4.0 * R * R, 2) * nL * nL + c.grad_LstarL + 8.0 * R * R * nL * c.grad_L;
          bound_outcome(o, l2_norm(spectral_derivative(apply_F1(s.L, s.X), 0)), C * h1_norm(s.X), 1e-10);
          break;
        }
        case 8: {
          const auto& c = *s.L.commutators();
          const double C = nL + 4.0 * R * R * nL + c.grad_L;
          bound_outcome(o, l2_norm(spectral_derivative(apply_F2(s.L, s.X), 0)), C * h1_norm(s.X), 1e-10);
          break;
        }
      }
      return o;
    }));
  }

  out.push_back(run_check("scalar_sde_fixed_point", cfg.sde_samples, chain, [&](std::size_t i) {
    auto rng = sample_stream(seed, kSde, i);
    const double c0 = 4.0 * rng.uniform() - 2.0, c1 = 4.0 * rng.uniform() - 2.0;
    auto C = [c0, c1](double t, double M) { return c0 * std::sin(3.0 * t) + c1 * M; };
    Outcome o;
    const double dev = check_scalar_sde(C, seed + i, 1e-3, 1.0, 1.0);
    o.ratio = dev;
    o.fail = dev != 0.0;
    return o;
  }));

  CheckReport nc;
  nc.check_name = "norm_chain";
  nc.samples = chain.ops;
  nc.failures = chain.fails;
  nc.worst_ratio = 0.0;
  out.push_back(nc);
  return out;
}

}  // namespace bmf
