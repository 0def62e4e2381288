#include "bmf/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace bmf {

namespace {

double weighted_norm(const GridSpec& g, std::span<const cplx> v) {
  double s = 0.0;
  for (auto z : v) s += std::norm(z);
  return std::sqrt(g.cell_volume() * s);
}

cplx weighted_dot(const GridSpec& g, std::span<const cplx> a, std::span<const cplx> b) {
  cplx s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return g.cell_volume() * s;
}

// Sup of |grad s| for a symbol sampled on the grid, via spectral derivatives.
double spectral_grad_sup(const GridSpec& g, const std::vector<cplx>& s) {
  std::vector<double> mag2(s.size(), 0.0);
  for (int a = 0; a < g.dim; ++a) {
    const auto d = spectral_derivative(WaveFunction(g, s), a);
    for (std::size_t i = 0; i < s.size(); ++i) mag2[i] += std::norm(d.values[i]);
  }
  double m = 0.0;
  for (double v : mag2) m = std::max(m, std::sqrt(v));
  return m;
}

}  // namespace

CouplingOperator CouplingOperator::multiplication(const GridSpec& g, std::vector<cplx> symbol,
                                                  std::optional<CommutatorNorms> comm) {
  if (symbol.size() != g.size()) throw std::invalid_argument("multiplication symbol size mismatch");
  CouplingOperator L;
  L.kind_ = Kind::multiplication;
  L.grid_ = g;
  double sup = 0.0;
  for (auto z : symbol) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
      throw std::invalid_argument("multiplication symbol is not finite");
    sup = std::max(sup, std::abs(z));
  }
  L.norm_bound_ = sup;
  L.is_zero_ = sup == 0.0;
  if (!comm) {
    std::vector<cplx> abs2(symbol.size());
    for (std::size_t i = 0; i < symbol.size(); ++i) abs2[i] = std::norm(symbol[i]);
    comm = CommutatorNorms{spectral_grad_sup(g, symbol), spectral_grad_sup(g, abs2)};
  }
  L.comm_ = comm;
  L.symbol_ = std::move(symbol);
  return L;
}

CouplingOperator CouplingOperator::finite_rank(const GridSpec& g, std::vector<FiniteRankTerm> terms) {
  CouplingOperator L;
  L.kind_ = Kind::finite_rank;
  L.grid_ = g;
  double bound = 0.0;
  for (const auto& t : terms) {
    if (t.f.size() != g.size() || t.g.size() != g.size())
      throw std::invalid_argument("finite-rank vector size mismatch");
    bound += std::abs(t.lambda) * weighted_norm(g, t.f) * weighted_norm(g, t.g);
  }
  L.norm_bound_ = bound;
  L.is_zero_ = bound == 0.0;
  L.terms_ = std::move(terms);
  return L;
}

CouplingOperator CouplingOperator::dense(const GridSpec& g, Matrix a) {
  if (g.size() > max_dense_size) throw std::invalid_argument("dense coupling limited to 64 grid points");
  if (a.rows() != g.size() || a.cols() != g.size())
    throw std::invalid_argument("dense coupling matrix size mismatch");
  CouplingOperator L;
  L.kind_ = Kind::dense;
  L.grid_ = g;
  // Largest singular value, inflated to cover eigensolver rounding.
  const double s = operator_norm(a);
  L.norm_bound_ = s * (1.0 + 1e-12) + 1e-14;
  L.is_zero_ = frobenius_norm(a) == 0.0;
  L.matrix_ = std::move(a);
  return L;
}

CouplingOperator CouplingOperator::scalar(const GridSpec& g, cplx lambda) {
  return multiplication(g, std::vector<cplx>(g.size(), lambda), CommutatorNorms{0.0, 0.0});
}

CouplingOperator CouplingOperator::cosine(const GridSpec& g, double amplitude, int mode) {
  const double k = 2.0 * std::numbers::pi * mode / g.box_length;
  std::vector<cplx> s(g.size());
  for (std::size_t flat = 0; flat < s.size(); ++flat) {
    const double x = g.coordinate(g.unravel(flat)[0]);
    s[flat] = amplitude * std::cos(k * x);
  }
  // |g'| <= |A| k and |(g^2)'| = A^2 k |sin 2kx| <= A^2 k.
  const double ak = std::abs(amplitude) * std::abs(k);
  return multiplication(g, std::move(s), CommutatorNorms{ak, amplitude * amplitude * std::abs(k)});
}

void CouplingOperator::apply(std::span<const cplx> in, std::span<cplx> out, bool adjoint) const {
  const std::size_t m = grid_.size();
  if (in.size() != m || out.size() != m) throw std::invalid_argument("coupling apply size mismatch");
  switch (kind_) {
    case Kind::multiplication:
      if (adjoint)
        for (std::size_t i = 0; i < m; ++i) out[i] = std::conj(symbol_[i]) * in[i];
      else
        for (std::size_t i = 0; i < m; ++i) out[i] = symbol_[i] * in[i];
      break;
    case Kind::finite_rank: {
      std::vector<cplx> acc(m, 0.0);
      for (const auto& t : terms_) {
        const auto& src = adjoint ? t.f : t.g;
        const auto& dst = adjoint ? t.g : t.f;
        const cplx c = (adjoint ? std::conj(t.lambda) : t.lambda) * weighted_dot(grid_, src, in);
        for (std::size_t i = 0; i < m; ++i) acc[i] += c * dst[i];
      }
      std::copy(acc.begin(), acc.end(), out.begin());
      break;
    }
    case Kind::dense: {
      std::vector<cplx> acc(m, 0.0);
      for (std::size_t i = 0; i < m; ++i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < m; ++j)
          s += (adjoint ? std::conj(matrix_(j, i)) : matrix_(i, j)) * in[j];
        acc[i] = s;
      }
      std::copy(acc.begin(), acc.end(), out.begin());
      break;
    }
  }
}

WaveFunction CouplingOperator::apply(const WaveFunction& u, bool adjoint) const {
  if (!(u.grid == grid_)) throw std::invalid_argument("coupling apply: grid mismatch");
  WaveFunction out(grid_);
  apply(u.values, out.values, adjoint);
  return out;
}

void CouplingOperator::apply_axis(std::span<const cplx> in, std::span<cplx> out, std::size_t outer,
                                  std::size_t inner, bool adjoint) const {
  const std::size_t m = grid_.size();
  if (in.size() != outer * m * inner || out.size() != in.size())
    throw std::invalid_argument("coupling apply_axis size mismatch");
  if (kind_ == Kind::multiplication) {
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t k = 0; k < m; ++k) {
        const cplx s = adjoint ? std::conj(symbol_[k]) : symbol_[k];
        const std::size_t base = (o * m + k) * inner;
        for (std::size_t i = 0; i < inner; ++i) out[base + i] = s * in[base + i];
      }
    return;
  }
  std::vector<cplx> fiber(m), res(m);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t i = 0; i < inner; ++i) {
      for (std::size_t k = 0; k < m; ++k) fiber[k] = in[(o * m + k) * inner + i];
      apply(fiber, res, adjoint);
      for (std::size_t k = 0; k < m; ++k) out[(o * m + k) * inner + i] = res[k];
    }
}

CouplingOperator CouplingOperator::adjoint() const {
  CouplingOperator a = *this;
  switch (kind_) {
    case Kind::multiplication:
      for (auto& z : a.symbol_) z = std::conj(z);
      break;
    case Kind::finite_rank:
      for (auto& t : a.terms_) {
        std::swap(t.f, t.g);
        t.lambda = std::conj(t.lambda);
      }
      break;
    case Kind::dense:
      a.matrix_ = matrix_.adjoint();
      break;
  }
  return a;
}

Matrix CouplingOperator::to_dense() const {
  const std::size_t m = grid_.size();
  if (m > 4096) throw std::invalid_argument("to_dense: grid too large");
  Matrix out(m, m);
  std::vector<cplx> e(m, 0.0), col(m);
  for (std::size_t j = 0; j < m; ++j) {
    e[j] = 1.0;
    apply(e, col);
    for (std::size_t i = 0; i < m; ++i) out(i, j) = col[i];
    e[j] = 0.0;
  }
  return out;
}

PotentialSpec PotentialSpec::gaussian(const GridSpec& g, double V0, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian potential: sigma must be positive");
  PotentialSpec p;
  p.family = Family::gaussian;
  p.V0 = V0;
  p.sigma = sigma;
  p.samples = RealGridFunction(g);
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    const auto idx = g.unravel(flat);
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) {
      const double x = g.coordinate(idx[static_cast<std::size_t>(a)]);
      r2 += x * x;
    }
    p.samples.values[flat] = V0 * std::exp(-r2 / (2.0 * sigma * sigma));
  }
  return p;
}

PotentialSpec PotentialSpec::cosine(const GridSpec& g, double V0, int mode) {
  PotentialSpec p;
  p.family = Family::cosine;
  p.V0 = V0;
  p.mode = mode;
  p.samples = RealGridFunction(g);
  const double k = 2.0 * std::numbers::pi * mode / g.box_length;
  for (std::size_t flat = 0; flat < g.size(); ++flat)
    p.samples.values[flat] = V0 * std::cos(k * g.coordinate(g.unravel(flat)[0]));
  return p;
}

PotentialSpec PotentialSpec::zero(const GridSpec& g) {
  PotentialSpec p;
  p.samples = RealGridFunction(g);
  return p;
}

double PotentialSpec::evenness_error() const {
  const auto& g = samples.grid;
  double m = 0.0;
  for (std::size_t flat = 0; flat < g.size(); ++flat) {
    auto idx = g.unravel(flat);
    for (int a = 0; a < g.dim; ++a) {
      auto& k = idx[static_cast<std::size_t>(a)];
      k = (g.n - k) % g.n;
    }
    m = std::max(m, std::abs(samples.values[flat] - samples.values[g.ravel(idx)]));
  }
  return m;
}

TruncationProfile::TruncationProfile(double R_) : R(R_) {
  if (!(R >= 1.0)) throw std::invalid_argument("truncation radius must be >= 1");
}

double TruncationProfile::theta(double x) {
  const double s = x - 1.0;
  if (s <= 0.0) return 1.0;
  if (s >= 1.0) return 0.0;
  // Logistic form of exp(-1/(1-s)) / (exp(-1/(1-s)) + exp(-1/s)); stays finite
  // near both ends.
  return 1.0 / (1.0 + std::exp(1.0 / (1.0 - s) - 1.0 / s));
}

double expect_L(const CouplingOperator& L, const WaveFunction& psi) {
  if (!(psi.grid == L.grid())) throw std::invalid_argument("expect_L: grid mismatch");
  if (L.is_zero()) return 0.0;
  const auto Lpsi = L.apply(psi);
  return inner_l2(psi, Lpsi);
}

WaveFunction apply_F1(const CouplingOperator& L, const WaveFunction& X) {
  WaveFunction out(X.grid);
  if (L.is_zero()) return out;
  const auto LX = L.apply(X);
  const auto LsLX = L.apply(LX, true);
  const double m = inner_l2(X, LX);
  for (std::size_t i = 0; i < X.size(); ++i)
    out.values[i] = LsLX.values[i] - 2.0 * m * LX.values[i] + m * m * X.values[i];
  return out;
}

WaveFunction apply_F2(const CouplingOperator& L, const WaveFunction& X) {
  WaveFunction out(X.grid);
  if (L.is_zero()) return out;
  const auto LX = L.apply(X);
  const double m = inner_l2(X, LX);
  for (std::size_t i = 0; i < X.size(); ++i) out.values[i] = LX.values[i] - m * X.values[i];
  return out;
}

}  // namespace bmf
