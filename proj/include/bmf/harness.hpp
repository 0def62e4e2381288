#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmf/indicators.hpp"
#include "bmf/meanfield.hpp"
#include "bmf/nbody.hpp"
#include "bmf/stats.hpp"

namespace bmf {

enum class MeanFieldMode { picard, ensemble };

/// Everything a coupled or mean-field-only experiment shares.
struct ExperimentSetup {
  GridSpec grid;
  Physics phys;
  WaveFunction phi0;
  SchemeParams scheme;
  double T = 0.25;
  std::uint64_t seed = 1;
  std::size_t sample_stride = 10;
  MeanFieldMode mode = MeanFieldMode::picard;
  std::size_t M = 100;  // trajectories in the law precompute
  double picard_tol = 1e-4;
  int max_iters = 20;

  std::size_t steps() const;
  // Step indices at which samples are taken: multiples of the stride and K.
  std::vector<std::size_t> sample_steps() const;
};

struct LawPrecompute {
  XiPath xi;
  std::vector<double> residuals;
  bool converged = true;
};

// xi_t = E|u(t)|^2 by Picard iteration or a McKean-Vlasov ensemble, using
// the precompute stream family.
LawPrecompute precompute_law(const ExperimentSetup& s);

/// A trajectory failure inside an experiment, with its coordinate.
class ExperimentAbort : public std::runtime_error {
 public:
  ExperimentAbort(const std::string& what, std::size_t N, std::size_t rep, std::size_t step);
  std::size_t n_particles, repetition, step;
};

struct ConvergenceConfig {
  ExperimentSetup setup;
  std::vector<std::size_t> N_list{1, 2, 3};
  std::size_t repetitions = 100;
  std::size_t memory_budget_mb = 1024;
  bool pair_indicators = false;
};

struct IndicatorSummary {
  double t = 0.0;
  std::size_t n_particles = 0;
  SampleSummary i_hat;
  SampleSummary r_trace;
};

struct PairSample {
  double t = 0.0;
  std::size_t n_particles = 0;
  std::size_t repetition = 0;
  double i_pair = 0.0;
  double i_first = 0.0;
  double i_second = 0.0;
};

struct DriftRecord {
  std::size_t n_particles = 0;
  std::size_t repetition = 0;
  double nbody = 0.0;
  double meanfield = 0.0;
};

struct ConvergenceResult {
  LawPrecompute law;
  std::vector<IndicatorSample> samples;   // ordered by (N, rep, t)
  std::vector<IndicatorSummary> summary;  // ordered by (N, t)
  std::vector<PairSample> pairs;          // ordered by (N, rep, t)
  std::vector<DriftRecord> drift;
  std::size_t sandwich_violations = 0;
  std::size_t pair_violations = 0;
  double max_initial_indicator = 0.0;  // max over repetitions of |I(0)|
};

/// N-body trajectories against mean-field trajectories on shared Brownian
/// increments: particle j of repetition r uses key (r, j, step) in the
/// trajectory family and phi^{MF,1} uses (r, 0, step).
ConvergenceResult run_convergence(const ConvergenceConfig& cfg);

// 1 - |<phi_a (x) ... , psi>|^2 summed over the remaining particles, where
// axes with a null entry are traced out.
double overlap_indicator(const WaveFunctionNP& psi, const std::vector<const WaveFunction*>& phis);

struct NBodySample {
  double t = 0.0;
  std::size_t n_particles = 0;
  std::size_t repetition = 0;
  double norm_drift = 0.0;  // largest pre-renormalization drift since the previous sample
  double purity = 1.0;      // Tr rho1^2 of the first marginal
};

// Plain N-body trajectories from phi0^{(x)N}, ordered by (N, rep, t).
std::vector<NBodySample> run_nbody_ensemble(const ExperimentSetup& s, const std::vector<std::size_t>& N_list,
                                            std::size_t repetitions, std::size_t memory_budget_mb);

struct DeltaSweepConfig {
  ExperimentSetup setup;
  std::vector<std::size_t> N_list{8, 16, 32, 64};
  std::size_t repetitions = 100;
  int h1_power = 4;
};

struct DeltaSummary {
  double t = 0.0;
  std::size_t n_particles = 0;
  SampleSummary l1;
  SampleSummary l2;
};

struct EnvelopeFit {
  double s0 = 0.0;
  double rate = 0.0;      // max(0, OLS slope of log s(t))
  double constant = 1.0;  // smallest C with s(t) <= C s0 exp(rate t)
  bool finite = true;
};

EnvelopeFit fit_exponential_envelope(const std::vector<double>& t, const std::vector<double>& s);

struct DeltaSweepResult {
  LawPrecompute law;
  std::vector<DeltaStats> rows;        // ordered by (N, rep, t)
  std::vector<DeltaSummary> summary;   // ordered by (N, t)
  double fit_time = 0.0;
  LinearFit l2_fit;                    // log E|delta|_L2 against log(N - 1) at fit_time
  std::vector<double> h1_times;
  std::vector<double> h1_moments;
  EnvelopeFit h1_envelope;
};

/// Independent mean-field copies phi^{MF,j}, j = 2..N, driven by keys
/// (r, j - 1, step); copies are shared between the N in the list.
DeltaSweepResult run_delta_sweep(const DeltaSweepConfig& cfg);

}  // namespace bmf
