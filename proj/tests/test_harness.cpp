#include <doctest.h>

#include <cmath>
#include <omp.h>

#include "bmf/harness.hpp"
#include "bmf/indicators.hpp"
#include "helpers.hpp"

using namespace bmf;

namespace {

ExperimentSetup small_setup(bool with_potential) {
  ExperimentSetup s;
  s.grid = GridSpec(1, 16, 10.0);
  s.phys = {CouplingOperator::cosine(s.grid, 1.0),
            with_potential ? PotentialSpec::gaussian(s.grid, 1.0, 1.0) : PotentialSpec::zero(s.grid)};
  s.phi0 = gaussian_packet(s.grid, 0.0, 1.0);
  s.T = 0.02;
  s.M = 16;
  s.sample_stride = 5;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("summary statistics") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto s = summarize(x);
  CHECK(s.mean == 2.5);
  CHECK(s.standard_error == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(s.ci_low == doctest::Approx(2.5 - 1.96 * s.standard_error));
  CHECK(summarize(std::vector<double>{7.0}).standard_error == 0.0);

  const std::vector<double> y{1.5, 0.5, -0.5, -1.5};
  const auto f = ols_fit(x, y);
  CHECK(f.slope == doctest::Approx(-1.0));
  CHECK(f.intercept == doctest::Approx(2.5));
  CHECK(f.slope_se == doctest::Approx(0.0).epsilon(1e-12));
  // y = x + (+1, -1, -1, +1): slope 1, residual sd sqrt(4/2), Sxx = 5
  const auto g = ols_fit(x, std::vector<double>{2, 1, 2, 5});
  CHECK(g.slope == doctest::Approx(1.0));
  CHECK(g.slope_se == doctest::Approx(std::sqrt(2.0 / 5.0)));
}

TEST_CASE("exponential envelope") {
  std::vector<double> t, s, d;
  for (int i = 0; i <= 10; ++i) {
    t.push_back(0.1 * i);
    s.push_back(2.0 * std::exp(0.5 * t.back()));
    d.push_back(2.0 * std::exp(-t.back()));
  }
  const auto e = fit_exponential_envelope(t, s);
  CHECK(e.s0 == 2.0);
  CHECK(e.rate == doctest::Approx(0.5));
  CHECK(e.constant == doctest::Approx(1.0));
  CHECK(e.finite);
  const auto f = fit_exponential_envelope(t, d);
  CHECK(f.rate == 0.0);
  CHECK(f.constant == doctest::Approx(1.0));
  s[4] = INFINITY;
  CHECK_FALSE(fit_exponential_envelope(t, s).finite);
}

TEST_CASE("overlap indicator matches marginal indicators") {
  const GridSpec g(1, 8, 6.0);
  const auto a = bmf::test::random_wave(g, 1);
  const auto b = bmf::test::random_wave(g, 2);
  const auto c = bmf::test::random_wave(g, 3);
  const auto mix = [&](std::size_t i) { return 0.8 * a.values[i] + 0.6 * c.values[i]; };
  WaveFunctionNP psi(g, 3);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j)
      for (std::size_t k = 0; k < 8; ++k) psi.values[(i * 8 + j) * 8 + k] = mix(i) * b.values[j] * mix(k) + c.values[i] * a.values[j] * b.values[k];
  const double n = psi.norm();
  for (auto& z : psi.values) z /= n;
  CHECK(overlap_indicator(psi, {&a, nullptr, nullptr}) == doctest::Approx(pickl_hat(first_marginal(psi), a)).epsilon(1e-12));
  CHECK(overlap_indicator(psi, {&a, &b, nullptr}) == doctest::Approx(pickl_hat_pair(pair_marginal(psi, 0, 1), a, b)).epsilon(1e-12));
  CHECK(overlap_indicator(WaveFunctionNP::product({a, b}), {&a, &b}) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("convergence experiment without interaction has zero indicator") {
  ConvergenceConfig c;
  c.setup = small_setup(false);
  c.N_list = {1, 2};
  c.repetitions = 10;
  c.pair_indicators = true;
  const auto r = run_convergence(c);
  CHECK(r.samples.size() == 2 * 10 * c.setup.sample_steps().size());
  for (const auto& s : r.samples) {
    CHECK(std::abs(s.i_hat) < 1e-6);
    CHECK(s.r_trace < 1e-3);
  }
  CHECK(r.sandwich_violations == 0);
  CHECK(r.pair_violations == 0);
  CHECK(r.max_initial_indicator < 1e-12);
  c.repetitions = 5;
  CHECK_THROWS_AS(run_convergence(c), std::invalid_argument);
}

TEST_CASE("convergence experiment does not depend on the thread count") {
  ConvergenceConfig c;
  c.setup = small_setup(true);
  c.N_list = {2, 3};
  c.repetitions = 10;
  omp_set_num_threads(1);
  const auto a = run_convergence(c);
  omp_set_num_threads(4);
  const auto b = run_convergence(c);
  omp_set_num_threads(1);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].i_hat == b.samples[i].i_hat);
    CHECK(a.samples[i].r_trace == b.samples[i].r_trace);
  }
  CHECK(a.sandwich_violations == 0);
}

TEST_CASE("delta sweep with scalar coupling") {
  DeltaSweepConfig c;
  c.setup = small_setup(true);
  c.setup.phys.L = CouplingOperator::scalar(c.setup.grid, 0.7);
  c.setup.picard_tol = 1e-13;
  c.setup.max_iters = 40;
  c.N_list = {2, 4};
  c.repetitions = 3;
  const auto r = run_delta_sweep(c);
  CHECK(r.rows.size() == 2 * 3 * c.setup.sample_steps().size());
  for (const auto& d : r.rows) CHECK(d.l1_norm < 1e-10);
  CHECK(r.h1_envelope.finite);
  CHECK(r.fit_time == doctest::Approx(c.setup.T));
}

TEST_CASE("plain N-body ensemble") {
  const auto s = small_setup(true);
  const auto rows = run_nbody_ensemble(s, {2}, 2, 64);
  CHECK(rows.size() == 2 * s.sample_steps().size());
  CHECK(rows.front().t == 0.0);
  CHECK(rows.front().purity == doctest::Approx(1.0).epsilon(1e-13));
  for (const auto& r : rows) CHECK(r.purity <= 1.0 + 1e-12);
}
