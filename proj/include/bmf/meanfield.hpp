#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bmf/brownian.hpp"
#include "bmf/coupling.hpp"
#include "bmf/density.hpp"
#include "bmf/grid.hpp"

namespace bmf {

struct Physics {
  CouplingOperator L;
  PotentialSpec V;
};

struct SchemeParams {
  double dt = 1e-3;
  bool renormalize = true;

  // Rejects dt > 0.1 and dt * ||L||^2 > 0.5.
  void validate(double L_norm_bound) const;
};

// Raised when a state stops being finite (or a density path loses its trace).
class NumericalAbort : public std::runtime_error {
 public:
  NumericalAbort(const std::string& what, std::size_t step)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

/// Density path on the step knots t_k = k dt, k = 0..K. Between knots the
/// left value is used.
struct XiPath {
  double dt = 0.0;
  std::vector<RealGridFunction> values;

  static XiPath constant(const RealGridFunction& xi, double dt, std::size_t steps);

  std::size_t steps() const { return values.empty() ? 0 : values.size() - 1; }
  double final_time() const { return dt * static_cast<double>(steps()); }
  const RealGridFunction& at_step(std::size_t k) const;
  // Throws unless every knot is a unit-mass density.
  void validate(const Tolerances& tol = {}) const;
};

// sup_k |a_k - b_k|_{L^1}
double xi_distance(const XiPath& a, const XiPath& b);

struct Trajectory {
  std::vector<double> times;
  std::vector<WaveFunction> states;
  std::vector<double> norm_drift;  // | |u| - 1 | before renormalization, at sample times
  std::vector<double> h1_series;
  double max_norm_drift = 0.0;     // over every step
};

using IncrementFn = std::function<double(std::size_t step)>;

struct StepInfo {
  double norm_before_renormalization = 1.0;
  double theta = 1.0;
};

// Hartree potential V * xi.
RealGridFunction hartree_potential(const PotentialSpec& V, const RealGridFunction& xi);

/// One Strang step: S(dt/2), Hartree phase exp(-i dt V*xi), Ito Euler-Maruyama
/// for -1/2 Theta^2 F1(u)u dt + Theta F2(u)u dW, S(dt/2). Without a profile
/// Theta = 1.
WaveFunction step_intermediate(const WaveFunction& u, const RealGridFunction& xi_t, double dW,
                               const SchemeParams& params, const CouplingOperator& L,
                               const PotentialSpec& V, const TruncationProfile* profile = nullptr,
                               double running_sup = 1.0, StepInfo* info = nullptr);

struct SolveOptions {
  std::size_t sample_stride = 1;
  bool keep_states = true;
  bool record_h1 = true;
  const TruncationProfile* profile = nullptr;
};

Trajectory solve_intermediate(const WaveFunction& u0, const XiPath& xi, const IncrementFn& dW,
                              const SchemeParams& params, const Physics& phys,
                              const SolveOptions& opts = {});

struct MeanFieldConfig {
  SchemeParams scheme;
  double T = 0.25;
  std::size_t M = 100;
  double picard_tol = 1e-4;
  int max_iters = 20;
  std::uint64_t seed = 1;
  StreamFamily family = StreamFamily::precompute;
  std::size_t sample_stride = 10;
  bool keep_trajectories = true;

  std::size_t steps() const;
};

struct MeanFieldResult {
  XiPath xi;  // the law path that drives `trajectories`
  std::vector<Trajectory> trajectories;
  std::vector<double> residuals;  // Picard only, one per iteration
  bool converged = true;
};

using InitialSampler = std::function<WaveFunction(std::size_t m)>;

// Trajectory m uses increments driver.increment(m, 0, step), the same in
// every iteration.
MeanFieldResult picard_meanfield(const InitialSampler& u0, const Physics& phys,
                                 const MeanFieldConfig& cfg);
MeanFieldResult ensemble_meanfield(const InitialSampler& u0, const Physics& phys,
                                   const MeanFieldConfig& cfg);

struct DensityPath {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> traces;
};

/// Euler-Maruyama for the mean-field Belavkin density equation, split the
/// same way as step_intermediate. Hermiticity is restored after every step.
DensityPath evolve_belavkin_density(const DensityMatrix& p0, const GridSpec& grid,
                                    const XiPath& xi, const IncrementFn& dW,
                                    const SchemeParams& params, const Physics& phys,
                                    std::size_t sample_stride = 1);

// Mean over trajectories of |u(t)|_{H^1}^p at each sample time.
std::vector<double> h1_moment_series(const std::vector<Trajectory>& ensemble, int p);

}  // namespace bmf
