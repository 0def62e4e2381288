#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bmf/density.hpp"
#include "bmf/fft.hpp"
#include "bmf/meanfield.hpp"

namespace bmf {

/// N-particle wave function on the tensor-product grid.
///
/// Flat index: particle 0 is the slowest axis block, each block of m = n^d
/// points ordered as the single-particle grid.
struct WaveFunctionNP {
  GridSpec grid;
  std::size_t n_particles = 1;
  std::vector<cplx> values;

  WaveFunctionNP() = default;
  WaveFunctionNP(const GridSpec& g, std::size_t N);
  WaveFunctionNP(const GridSpec& g, std::size_t N, std::vector<cplx> v);

  static WaveFunctionNP product(const std::vector<WaveFunction>& factors);
  static WaveFunctionNP tensor_power(const WaveFunction& phi, std::size_t N);

  std::size_t one_body_size() const { return grid.size(); }
  std::size_t size() const { return values.size(); }
  double weight() const;  // h^{dN}
  double norm() const;
  bool all_finite() const;
};

// Total tensor size m^N, or throws if it overflows the point limit.
std::size_t tensor_size(std::size_t m, std::size_t N);

// Bytes the stepper needs for one trajectory (state, scratch and phases).
std::size_t nbody_memory_bytes(const GridSpec& g, std::size_t N);

// out[axis perm[a]] = in[axis a]: particle a of the input becomes particle
// perm[a] of the output.
WaveFunctionNP permute_particles(const WaveFunctionNP& psi, const std::vector<std::size_t>& perm);

/// Strang stepper for the N-particle filtering equation.
class NBodyStepper {
 public:
  using IncrementFn = std::function<double(std::uint32_t particle, std::size_t step)>;

  NBodyStepper(const GridSpec& g, std::size_t N, const SchemeParams& params, const Physics& phys,
               std::size_t memory_budget_mb = 1024, bool parallel = true);

  std::size_t n_particles() const { return N_; }

  // One unfused step with increments dW[j] for particle j. Returns the norm
  // before renormalization.
  double step(WaveFunctionNP& psi, std::span<const double> dW) const;

  // `steps` consecutive steps with keys first_step.. ; adjacent kinetic
  // half-steps are merged. Returns the largest pre-renormalization norm drift.
  double evolve(WaveFunctionNP& psi, std::size_t first_step, std::size_t steps,
                const IncrementFn& dW) const;

 private:
  void kinetic(std::vector<cplx>& v, const std::vector<cplx>& factors) const;
  void interaction(std::vector<cplx>& v) const;
  double coupling(std::vector<cplx>& v, std::span<const double> dW) const;  // returns norm

  GridSpec grid_;
  std::size_t N_;
  SchemeParams params_;
  Physics phys_;
  bool parallel_;
  const FftPlan& plan_;
  std::size_t m_;
  std::vector<cplx> half_;
  std::vector<cplx> full_;
  std::vector<cplx> interaction_;  // empty when there is no pair interaction
};

WaveFunctionNP step_nbody(const WaveFunctionNP& psi, std::span<const double> dW,
                          const SchemeParams& params, const Physics& phys);

inline constexpr std::size_t max_full_density_size = 4096;

DensityMatrix density_from_wave(const WaveFunctionNP& psi);
DensityMatrix first_marginal(const WaveFunctionNP& psi, bool parallel = true);
// Marginal of particles j and k (pair index x_j * m + x_k).
DensityMatrix pair_marginal(const WaveFunctionNP& psi, std::size_t j, std::size_t k);

}  // namespace bmf
