#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "bmf/brownian.hpp"
#include "bmf/linalg.hpp"
#include "bmf/meanfield.hpp"

namespace bmf {

/// Small dense operator with its three norms cached.
class LabOperator {
 public:
  explicit LabOperator(Matrix a);

  const Matrix& matrix() const { return a_; }
  std::size_t dim() const { return a_.rows(); }
  double operator_norm() const { return op_; }
  double hs_norm() const { return hs_; }
  double trace_norm() const { return tr_; }

  // ||A|| <= ||A||_2 <= ||A||_1 up to a relative rounding slack.
  bool norm_chain_holds(double rel_tol = 1e-12) const;

 private:
  Matrix a_;
  double op_, hs_, tr_;
};

inline constexpr std::size_t max_lab_dim = 64;

// Samplers. Ginibre entries are standard complex normals.
LabOperator random_density(std::size_t m, CounterStream& rng);
LabOperator random_rank1_projector(std::size_t m, CounterStream& rng);
LabOperator random_bounded(std::size_t m, CounterStream& rng, double cap);
LabOperator random_density(std::size_t m, std::uint64_t seed);
LabOperator random_rank1_projector(std::size_t m, std::uint64_t seed);
LabOperator random_bounded(std::size_t m, std::uint64_t seed, double cap);

// |Tr(ApBp) - Tr(Ap) Tr(Bp)|
double check_prodproj(const Matrix& A, const Matrix& B, const Matrix& p);

// Tr(rho) Tr(A* rho A) - ||rho A||_2^2
double check_hs_bound(const Matrix& rho, const Matrix& A);

enum class KolokoltsovMode { selfadjoint, general };

struct KolokoltsovResult {
  double lhs = 0.0;
  double alpha = 0.0;    // 1 - Tr(rho p)
  double L_norm = 0.0;
  double bound = 0.0;    // C ||L||^2 alpha
  bool pass = true;
};

double kolokoltsov_constant(KolokoltsovMode mode);
KolokoltsovResult check_kolokoltsov(const Matrix& L, const Matrix& p, const Matrix& rho,
                                    KolokoltsovMode mode);

// Euler-Maruyama for dM = C(t, M) (M - 1) dW; returns max_t |M_t - 1|.
double check_scalar_sde(const std::function<double(double t, double M)>& C, std::uint64_t seed,
                        double dt, double T, double M0 = 1.0);

struct StrongErrorReport {
  std::vector<double> dts;
  std::vector<double> errors;  // mean over paths at the final time
  double ratio = 0.0;          // errors[1] / errors[0]
  double max_trace_deviation = 0.0;
};

struct CrossCheckSetup {
  GridSpec grid;
  Physics phys;
  WaveFunction phi0;
  std::size_t n_particles = 2;  // N-body cross-check only
  double T = 0.1;
  double dt = 1e-3;             // coarse step; the second run uses dt / 4
  std::size_t paths = 20;
  std::uint64_t seed = 1;
};

// Density form of the mean-field equation against the projector of the wave
// solution driven by the same increments. Error: trace norm at T.
StrongErrorReport crosscheck_meanfield_density(const CrossCheckSetup& s);

// N-body density equation at tiny size against |Psi><Psi| from the N-body
// wave stepper under the same streams.
StrongErrorReport crosscheck_nbody_density(const CrossCheckSetup& s);

// Wave solver at dt and dt / 4 against a reference at dt / reference_factor
// on the same Brownian path. Error: L2 distance at T.
StrongErrorReport meanfield_strong_error(const CrossCheckSetup& s, std::uint32_t reference_factor = 64);

struct CheckReport {
  std::string check_name;
  std::size_t samples = 0;
  std::size_t failures = 0;
  double worst_ratio = 0.0;  // largest observed (lhs / bound) or (deviation / tolerance)
  std::optional<double> sharp_constant;
};

struct PropertySuiteConfig {
  std::uint64_t seed = 1;
  std::size_t prodproj_samples = 10000;
  std::size_t hs_samples = 10000;
  std::size_t kolokoltsov_samples = 100000;
  std::size_t p3_samples = 10000;
  std::size_t nonlinearity_samples = 10000;
  std::size_t sde_samples = 100;
};

std::vector<CheckReport> run_property_suite(const PropertySuiteConfig& cfg);

}  // namespace bmf
