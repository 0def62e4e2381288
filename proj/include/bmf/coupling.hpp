#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bmf/grid.hpp"
#include "bmf/linalg.hpp"

namespace bmf {

// Analytic commutator norms of a multiplication operator with symbol g:
// ||[grad, L]|| = sup |grad g| and ||[grad, L*L]|| = sup |grad |g|^2|.
struct CommutatorNorms {
  double grad_L = 0.0;
  double grad_LstarL = 0.0;
};

struct FiniteRankTerm {
  cplx lambda;
  std::vector<cplx> f;
  std::vector<cplx> g;
};

/// Bounded coupling operator on single-particle grid functions.
///
/// Three representations are supported: pointwise multiplication by a
/// complex symbol, a finite sum  f -> sum_k lambda_k <g_k, f> f_k  (weighted
/// sesquilinear product), and an explicit matrix acting on grid values for
/// tiny grids. Every instance carries an upper bound on its operator norm.
class CouplingOperator {
 public:
  enum class Kind { multiplication, finite_rank, dense };

  static constexpr std::size_t max_dense_size = 64;

  // Placeholder with no grid; assign a real operator before use.
  CouplingOperator() = default;

  static CouplingOperator multiplication(const GridSpec& g, std::vector<cplx> symbol,
                                         std::optional<CommutatorNorms> comm = std::nullopt);
  static CouplingOperator finite_rank(const GridSpec& g, std::vector<FiniteRankTerm> terms);
  static CouplingOperator dense(const GridSpec& g, Matrix a);

  static CouplingOperator scalar(const GridSpec& g, cplx lambda);
  static CouplingOperator zero(const GridSpec& g) { return scalar(g, 0.0); }
  // g(x) = amplitude * cos(2 pi mode x_1 / box_length)
  static CouplingOperator cosine(const GridSpec& g, double amplitude, int mode = 1);

  Kind kind() const { return kind_; }
  const GridSpec& grid() const { return grid_; }
  double norm_bound() const { return norm_bound_; }
  bool is_zero() const { return is_zero_; }

  // Only meaningful for the multiplication variant.
  std::span<const cplx> symbol() const { return symbol_; }
  const std::optional<CommutatorNorms>& commutators() const { return comm_; }

  void apply(std::span<const cplx> in, std::span<cplx> out, bool adjoint = false) const;
  WaveFunction apply(const WaveFunction& u, bool adjoint = false) const;

  // Applies L (or L*) along one tensor axis of a buffer laid out as
  // [outer][m][inner] with m = grid().size().
  void apply_axis(std::span<const cplx> in, std::span<cplx> out, std::size_t outer,
                  std::size_t inner, bool adjoint = false) const;

  CouplingOperator adjoint() const;
  Matrix to_dense() const;

 private:
  Kind kind_ = Kind::multiplication;
  GridSpec grid_;
  double norm_bound_ = 0.0;
  bool is_zero_ = true;
  std::vector<cplx> symbol_;
  std::optional<CommutatorNorms> comm_;
  std::vector<FiniteRankTerm> terms_;
  Matrix matrix_;
};

struct PotentialSpec {
  enum class Family { gaussian, cosine, zero };

  Family family = Family::zero;
  double V0 = 0.0;
  double sigma = 1.0;
  int mode = 1;
  RealGridFunction samples;

  static PotentialSpec gaussian(const GridSpec& g, double V0, double sigma);
  static PotentialSpec cosine(const GridSpec& g, double V0, int mode);
  static PotentialSpec zero(const GridSpec& g);

  bool is_zero() const { return family == Family::zero || V0 == 0.0; }
  // Max |V(x) - V(-x)| over the grid.
  double evenness_error() const;
};

/// Smooth cutoff: theta(x) = 1 for x <= 1, 0 for x >= 2, C-infinity between.
struct TruncationProfile {
  double R = 1.0;

  explicit TruncationProfile(double R_ = 1.0);

  static double theta(double x);
  // sup |theta'| over the transition region, attained at x = 1.5.
  static constexpr double theta_prime_sup = 2.0;

  double theta_R(double running_sup) const { return theta(running_sup / R); }
};

// <L>_psi = (psi, L psi) with the real product.
double expect_L(const CouplingOperator& L, const WaveFunction& psi);

// F1(X)X = L*L X - 2 <L>_X L X + <L>_X^2 X
WaveFunction apply_F1(const CouplingOperator& L, const WaveFunction& X);
// F2(X)X = L X - <L>_X X
WaveFunction apply_F2(const CouplingOperator& L, const WaveFunction& X);

}  // namespace bmf
