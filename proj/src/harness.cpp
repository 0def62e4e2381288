#include "bmf/harness.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace bmf {

std::size_t ExperimentSetup::steps() const {
  MeanFieldConfig c;
  c.scheme = scheme;
  c.T = T;
  return c.steps();
}

std::vector<std::size_t> ExperimentSetup::sample_steps() const {
  const std::size_t K = steps();
  const std::size_t stride = std::max<std::size_t>(1, sample_stride);
  std::vector<std::size_t> ks;
  for (std::size_t k = 0; k <= K; ++k)
    if (k % stride == 0 || k == K) ks.push_back(k);
  return ks;
}

LawPrecompute precompute_law(const ExperimentSetup& s) {
  MeanFieldConfig c;
  c.scheme = s.scheme;
  c.T = s.T;
  c.M = s.M;
  c.picard_tol = s.picard_tol;
  c.max_iters = s.max_iters;
  c.seed = s.seed;
  c.family = StreamFamily::precompute;
  c.sample_stride = s.sample_stride;
  c.keep_trajectories = false;
  const WaveFunction& phi0 = s.phi0;
  InitialSampler init = [&phi0](std::size_t) { return phi0; };
  auto r = s.mode == MeanFieldMode::picard ? picard_meanfield(init, s.phys, c)
                                           : ensemble_meanfield(init, s.phys, c);
  return {std::move(r.xi), std::move(r.residuals), r.converged};
}

ExperimentAbort::ExperimentAbort(const std::string& what, std::size_t N, std::size_t rep, std::size_t step_)
    : std::runtime_error(what + " (N=" + std::to_string(N) + ", repetition=" + std::to_string(rep) +
                         ", step=" + std::to_string(step_) + ")"),
      n_particles(N),
      repetition(rep),
      step(step_) {}

double overlap_indicator(const WaveFunctionNP& psi, const std::vector<const WaveFunction*>& phis) {
  const std::size_t N = psi.n_particles;
  const std::size_t m = psi.one_body_size();
  if (phis.size() != N) throw std::invalid_argument("overlap_indicator: one entry per particle");
  std::size_t n_rest = 1, n_contract = 0;
  for (const auto* p : phis) {
    if (p) {
      if (p->size() != m) throw std::invalid_argument("overlap_indicator: size mismatch");
      ++n_contract;
    } else {
      n_rest *= m;
    }
  }
  const double h = psi.grid.cell_volume();
  std::vector<cplx> amp(n_rest, 0.0);
  std::vector<std::size_t> idx(N);
  for (std::size_t flat = 0; flat < psi.size(); ++flat) {
    std::size_t r = flat;
    for (std::size_t a = N; a-- > 0;) {
      idx[a] = r % m;
      r /= m;
    }
    cplx c = psi.values[flat];
    std::size_t rest = 0;
    for (std::size_t a = 0; a < N; ++a) {
      if (phis[a])
        c *= std::conj(phis[a]->values[idx[a]]);
      else
        rest = rest * m + idx[a];
    }
    amp[rest] += c;
  }
  double s = 0.0;
  for (const auto& a : amp) s += std::norm(a);
  return 1.0 - std::pow(h, 2.0 * static_cast<double>(n_contract)) *
                   std::pow(h, static_cast<double>(N - n_contract)) * s;
}

namespace {

template <class Body>
void run_repetitions(std::size_t reps, std::size_t N, Body body) {
  std::vector<std::exception_ptr> errors(reps);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(reps); ++r) {
    const auto rep = static_cast<std::size_t>(r);
    try {
      body(rep);
    } catch (const NumericalAbort& e) {
      errors[rep] = std::make_exception_ptr(ExperimentAbort(e.what(), N, rep, e.step()));
    } catch (...) {
      errors[rep] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

ConvergenceResult run_convergence(const ConvergenceConfig& cfg) {
  const auto& s = cfg.setup;
  if (cfg.repetitions < 10) throw std::invalid_argument("run_convergence: need at least 10 repetitions");
  if (cfg.N_list.empty()) throw std::invalid_argument("run_convergence: empty N list");
  for (std::size_t N : cfg.N_list) {
    if (N < 1) throw std::invalid_argument("run_convergence: N must be >= 1");
    if (nbody_memory_bytes(s.grid, N) > cfg.memory_budget_mb * (std::size_t{1} << 20))
      throw std::invalid_argument("run_convergence: N = " + std::to_string(N) + " exceeds the memory budget");
  }
  require_normalized(s.phi0);

  ConvergenceResult res;
  res.law = precompute_law(s);
  const std::vector<std::size_t> ks = s.sample_steps();
  const std::size_t S = ks.size();
  const double dt = s.scheme.dt;
  const BrownianDriver drv(s.seed, dt, StreamFamily::trajectory);
  SolveOptions opts;
  opts.sample_stride = s.sample_stride;
  opts.record_h1 = false;

  for (std::size_t N : cfg.N_list) {
    const NBodyStepper stepper(s.grid, N, s.scheme, s.phys, cfg.memory_budget_mb, false);
    const bool pairs = cfg.pair_indicators && N >= 2;
    std::vector<std::vector<IndicatorSample>> samples(cfg.repetitions);
    std::vector<std::vector<PairSample>> pair_rows(cfg.repetitions);
    std::vector<DriftRecord> drift(cfg.repetitions);

    run_repetitions(cfg.repetitions, N, [&](std::size_t rep) {
      IncrementFn inc0 = [&drv, rep](std::size_t k) { return drv.increment(rep, 0, k); };
      const auto mf = solve_intermediate(s.phi0, res.law.xi, inc0, s.scheme, s.phys, opts);
      Trajectory mf2;
      if (pairs) {
        IncrementFn inc1 = [&drv, rep](std::size_t k) { return drv.increment(rep, 1, k); };
        mf2 = solve_intermediate(s.phi0, res.law.xi, inc1, s.scheme, s.phys, opts);
      }
      auto psi = WaveFunctionNP::tensor_power(s.phi0, N);
      auto incN = [&drv, rep](std::uint32_t j, std::size_t k) { return drv.increment(rep, j, k); };
      DriftRecord& d = drift[rep];
      d.n_particles = N;
      d.repetition = rep;
      d.meanfield = mf.max_norm_drift;
      std::size_t k_prev = 0;
      for (std::size_t si = 0; si < S; ++si) {
        const std::size_t k = ks[si];
        if (k > k_prev) {
          d.nbody = std::max(d.nbody, stepper.evolve(psi, k_prev, k - k_prev, incN));
          if (!psi.all_finite()) throw NumericalAbort("non-finite N-body state", k);
          k_prev = k;
        }
        const WaveFunction& phi = mf.states[si];
        const DensityMatrix rho1 = first_marginal(psi, false);
        IndicatorSample smp;
        smp.t = mf.times[si];
        smp.n_particles = N;
        smp.repetition = rep;
        smp.i_hat = pickl_hat(rho1, phi);
        smp.r_trace = trace_distance(rho1, DensityMatrix::pure(phi));
        samples[rep].push_back(smp);
        if (pairs) {
          const WaveFunction& phi2 = mf2.states[si];
          std::vector<const WaveFunction*> a(N, nullptr), b(N, nullptr), ab(N, nullptr);
          a[0] = &phi;
          b[1] = &phi2;
          ab[0] = &phi;
          ab[1] = &phi2;
          PairSample p;
          p.t = smp.t;
          p.n_particles = N;
          p.repetition = rep;
          p.i_first = overlap_indicator(psi, a);
          p.i_second = overlap_indicator(psi, b);
          p.i_pair = overlap_indicator(psi, ab);
          pair_rows[rep].push_back(p);
        }
      }
    });

    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
      const auto& v = samples[rep];
      res.max_initial_indicator = std::max(res.max_initial_indicator, std::abs(v.front().i_hat));
      for (const auto& smp : v) {
        if (!sandwich_check(smp.i_hat, smp.r_trace)) ++res.sandwich_violations;
        res.samples.push_back(smp);
      }
      for (const auto& p : pair_rows[rep]) {
        if (!pair_bound_check(p.i_pair, p.i_first, p.i_second)) ++res.pair_violations;
        res.pairs.push_back(p);
      }
      res.drift.push_back(drift[rep]);
    }
    for (std::size_t si = 0; si < S; ++si) {
      std::vector<double> ih(cfg.repetitions), rt(cfg.repetitions);
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        ih[rep] = samples[rep][si].i_hat;
        rt[rep] = samples[rep][si].r_trace;
      }
      res.summary.push_back({samples[0][si].t, N, summarize(ih), summarize(rt)});
    }
  }
  return res;
}

std::vector<NBodySample> run_nbody_ensemble(const ExperimentSetup& s, const std::vector<std::size_t>& N_list,
                                            std::size_t repetitions, std::size_t memory_budget_mb) {
  require_normalized(s.phi0);
  const auto ks = s.sample_steps();
  const BrownianDriver drv(s.seed, s.scheme.dt, StreamFamily::trajectory);
  std::vector<NBodySample> out;
  for (std::size_t N : N_list) {
    const NBodyStepper stepper(s.grid, N, s.scheme, s.phys, memory_budget_mb, false);
    std::vector<std::vector<NBodySample>> rows(repetitions);
    run_repetitions(repetitions, N, [&](std::size_t rep) {
      auto psi = WaveFunctionNP::tensor_power(s.phi0, N);
      auto inc = [&drv, rep](std::uint32_t j, std::size_t k) { return drv.increment(rep, j, k); };
      std::size_t k_prev = 0;
      for (std::size_t k : ks) {
        double drift = 0.0;
        if (k > k_prev) {
          drift = stepper.evolve(psi, k_prev, k - k_prev, inc);
          if (!psi.all_finite()) throw NumericalAbort("non-finite N-body state", k);
          k_prev = k;
        }
        const double f = frobenius_norm(first_marginal(psi, false).entries);
        rows[rep].push_back({s.scheme.dt * static_cast<double>(k), N, rep, drift, f * f});
      }
    });
    for (auto& r : rows) out.insert(out.end(), r.begin(), r.end());
  }
  return out;
}

EnvelopeFit fit_exponential_envelope(const std::vector<double>& t, const std::vector<double>& s) {
  EnvelopeFit e;
  if (t.size() != s.size() || t.size() < 2) throw std::invalid_argument("envelope fit: need two or more points");
  for (double v : s)
    if (!std::isfinite(v) || !(v > 0.0)) e.finite = false;
  if (!e.finite) {
    e.rate = std::numeric_limits<double>::infinity();
    e.constant = std::numeric_limits<double>::infinity();
    return e;
  }
  e.s0 = s.front();
  std::vector<double> logs(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) logs[i] = std::log(s[i]);
  e.rate = std::max(0.0, ols_fit(t, logs).slope);
  e.constant = 1.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    e.constant = std::max(e.constant, s[i] / (e.s0 * std::exp(e.rate * (t[i] - t.front()))));
  e.finite = std::isfinite(e.rate) && std::isfinite(e.constant);
  return e;
}

DeltaSweepResult run_delta_sweep(const DeltaSweepConfig& cfg) {
  const auto& s = cfg.setup;
  if (cfg.N_list.empty()) throw std::invalid_argument("run_delta_sweep: empty N list");
  if (cfg.repetitions < 2) throw std::invalid_argument("run_delta_sweep: need at least 2 repetitions");
  if (cfg.h1_power < 4 || cfg.h1_power % 2 != 0) throw std::invalid_argument("run_delta_sweep: h1 power must be even and >= 4");
  std::vector<std::size_t> Ns = cfg.N_list;
  std::sort(Ns.begin(), Ns.end());
  if (Ns.front() < 2 || std::adjacent_find(Ns.begin(), Ns.end()) != Ns.end())
    throw std::invalid_argument("run_delta_sweep: N values must be distinct and >= 2");
  require_normalized(s.phi0);

  DeltaSweepResult res;
  res.law = precompute_law(s);
  const auto ks = s.sample_steps();
  const std::size_t S = ks.size();
  const std::size_t copies = Ns.back() - 1;
  const BrownianDriver drv(s.seed, s.scheme.dt, StreamFamily::trajectory);
  SolveOptions opts;
  opts.sample_stride = s.sample_stride;

  // per_rep[rep][n_index][sample]
  std::vector<std::vector<std::vector<DeltaStats>>> per_rep(cfg.repetitions);
  std::vector<std::vector<std::vector<double>>> h1(cfg.repetitions);
  std::vector<double> times;

  run_repetitions(cfg.repetitions, Ns.back(), [&](std::size_t rep) {
    std::vector<RealGridFunction> acc(S, RealGridFunction(s.grid));
    auto& out = per_rep[rep];
    out.assign(Ns.size(), {});
    std::size_t next = 0;
    for (std::size_t j = 1; j <= copies; ++j) {
      IncrementFn inc = [&drv, rep, j](std::size_t k) { return drv.increment(rep, static_cast<std::uint32_t>(j), k); };
      auto tr = solve_intermediate(s.phi0, res.law.xi, inc, s.scheme, s.phys, opts);
      for (std::size_t si = 0; si < S; ++si)
        for (std::size_t i = 0; i < s.grid.size(); ++i) acc[si].values[i] += std::norm(tr.states[si].values[i]);
      h1[rep].push_back(std::move(tr.h1_series));
      while (next < Ns.size() && Ns[next] - 1 == j) {
        for (std::size_t si = 0; si < S; ++si) {
          DeltaStats d = delta_from_sum(acc[si], j, res.law.xi.at_step(ks[si]));
          d.t = s.scheme.dt * static_cast<double>(ks[si]);
          out[next].push_back(d);
        }
        ++next;
      }
    }
  });

  for (std::size_t si = 0; si < S; ++si) times.push_back(s.scheme.dt * static_cast<double>(ks[si]));
  for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep)
      for (const auto& d : per_rep[rep][ni]) res.rows.push_back(d);
    for (std::size_t si = 0; si < S; ++si) {
      std::vector<double> l1(cfg.repetitions), l2(cfg.repetitions);
      for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        l1[rep] = per_rep[rep][ni][si].l1_norm;
        l2[rep] = per_rep[rep][ni][si].l2_norm;
      }
      res.summary.push_back({times[si], Ns[ni], summarize(l1), summarize(l2)});
    }
  }

  res.fit_time = times.back();
  if (Ns.size() >= 2) {
    std::vector<double> x, y;
    for (std::size_t ni = 0; ni < Ns.size(); ++ni) {
      x.push_back(std::log(static_cast<double>(Ns[ni] - 1)));
      y.push_back(std::log(res.summary[ni * S + S - 1].l2.mean));
    }
    res.l2_fit = ols_fit(x, y);
  }

  res.h1_times = times;
  res.h1_moments.assign(S, 0.0);
  std::size_t count = 0;
  for (const auto& rep : h1)
    for (const auto& series : rep) {
      for (std::size_t si = 0; si < S; ++si) res.h1_moments[si] += std::pow(series[si], cfg.h1_power);
      ++count;
    }
  for (auto& v : res.h1_moments) v /= static_cast<double>(count);
  res.h1_envelope = fit_exponential_envelope(res.h1_times, res.h1_moments);
  return res;
}

}  // namespace bmf
