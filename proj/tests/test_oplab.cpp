#include <doctest.h>

#include <cmath>
#include <set>

#include "bmf/linalg.hpp"
#include "bmf/oplab.hpp"

using namespace bmf;

TEST_CASE("samplers") {
  CounterStream rng(3, 0);
  for (int i = 0; i < 20; ++i) {
    const auto rho = random_density(6, rng);
    CHECK(rho.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(hermiticity_error(rho.matrix()) < 1e-15);
    CHECK(hermitian_eigenvalues(rho.matrix()).front() > -1e-14);
    CHECK(rho.trace_norm() == doctest::Approx(1.0).epsilon(1e-10));

    const auto p = random_rank1_projector(6, rng);
    CHECK(max_abs_diff(p.matrix() * p.matrix(), p.matrix()) < 1e-14);
    CHECK(p.operator_norm() == doctest::Approx(1.0).epsilon(1e-10));

    const auto a = random_bounded(6, rng, 1.5);
    CHECK(a.operator_norm() <= 1.5 * (1.0 + 1e-12));
    CHECK(a.norm_chain_holds());
  }
  // seeded overloads are pure functions of the seed
  CHECK(max_abs_diff(random_density(4, 11).matrix(), random_density(4, 11).matrix()) == 0.0);
  CHECK(max_abs_diff(random_density(4, 11).matrix(), random_density(4, 12).matrix()) > 0.0);
  CHECK_THROWS(random_density(max_lab_dim + 1, 1));
}

TEST_CASE("identities on random operators") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto A = random_bounded(5, 100 + s, 2.0).matrix();
    const auto B = random_bounded(5, 200 + s, 2.0).matrix();
    const auto p = random_rank1_projector(5, 300 + s).matrix();
    const auto rho = random_density(5, 400 + s).matrix();
    CHECK(check_prodproj(A, B, p) < 1e-12);
    CHECK(check_hs_bound(rho, A) >= -1e-12);
    for (auto mode : {KolokoltsovMode::general, KolokoltsovMode::selfadjoint}) {
      const Matrix L = mode == KolokoltsovMode::selfadjoint ? hermitian_part(A) : A;
      const auto r = check_kolokoltsov(L, p, rho, mode);
      CHECK(r.pass);
      CHECK(r.alpha >= 0.0);
      CHECK(r.lhs <= r.bound + 1e-9);
      // rho = p is a fixed point: both sides vanish
      const auto z = check_kolokoltsov(L, p, p, mode);
      CHECK(std::abs(z.lhs) < 1e-12);
      CHECK(std::abs(z.alpha) < 1e-12);
    }
  }
  CHECK(kolokoltsov_constant(KolokoltsovMode::selfadjoint) == doctest::Approx(4.0 + 8.0 * std::sqrt(2.0)));
  CHECK(kolokoltsov_constant(KolokoltsovMode::general) == 32.0);
}

TEST_CASE("scalar martingale SDE") {
  const auto one = [](double, double) { return 1.0; };
  CHECK(check_scalar_sde(one, 1, 1e-3, 1.0) == 0.0);
  CHECK(check_scalar_sde([](double, double) { return 0.0; }, 1, 1e-3, 1.0, 1.3) == doctest::Approx(0.3));
  CHECK(check_scalar_sde(one, 1, 1e-3, 1.0, 1.01) > 0.01);
}

TEST_CASE("density cross-checks are exact without coupling or potential") {
  CrossCheckSetup s;
  s.grid = GridSpec(1, 8, 6.0);
  s.phys = {CouplingOperator::zero(s.grid), PotentialSpec::zero(s.grid)};
  s.phi0 = gaussian_packet(s.grid, 0.0, 1.0, 1.0);
  s.T = 0.05;
  s.paths = 2;
  const auto mf = crosscheck_meanfield_density(s);
  for (double e : mf.errors) CHECK(e < 1e-8);
  s.grid = GridSpec(1, 4, 4.0);
  s.phys = {CouplingOperator::zero(s.grid), PotentialSpec::zero(s.grid)};
  s.phi0 = gaussian_packet(s.grid, 0.0, 1.0);
  const auto nb = crosscheck_nbody_density(s);
  for (double e : nb.errors) CHECK(e < 1e-8);
}

TEST_CASE("density cross-checks with coupling shrink with the step") {
  CrossCheckSetup s;
  s.grid = GridSpec(1, 8, 6.0);
  s.phys = {CouplingOperator::cosine(s.grid, 1.0), PotentialSpec::gaussian(s.grid, 1.0, 1.0)};
  s.phi0 = gaussian_packet(s.grid, 0.0, 1.0);
  s.T = 0.1;
  s.dt = 2e-3;
  s.paths = 10;
  const auto r = crosscheck_meanfield_density(s);
  REQUIRE(r.errors.size() == 2);
  CHECK(r.errors[1] < r.errors[0]);
  CHECK(r.max_trace_deviation < 5.0 * s.dt);
}

TEST_CASE("small property suite") {
  PropertySuiteConfig c;
  c.seed = 5;
  c.prodproj_samples = c.hs_samples = c.p3_samples = c.nonlinearity_samples = 40;
  c.kolokoltsov_samples = 200;
  c.sde_samples = 4;
  const auto reports = run_property_suite(c);
  std::set<std::string> names;
  for (const auto& r : reports) {
    names.insert(r.check_name);
    CHECK_MESSAGE(r.failures == 0, r.check_name);
    CHECK(r.samples > 0);
    CHECK(r.worst_ratio <= 1.0);
  }
  CHECK(names.size() == reports.size());
  CHECK(names.count("kolokoltsov_general") == 1);
  CHECK(names.count("f2_gradient_bound") == 1);
  const auto again = run_property_suite(c);
  for (std::size_t i = 0; i < reports.size(); ++i) CHECK(again[i].worst_ratio == reports[i].worst_ratio);
}
