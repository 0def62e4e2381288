#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bmf/brownian.hpp"

using namespace bmf;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Philox4x32Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        Philox4x32Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        Philox4x32Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("open uniforms never hit the endpoints") {
  CHECK(uniform_open(0, 0) > 0.0);
  CHECK(uniform_open(0xffffffff, 0xffffffff) < 1.0);
  CHECK(uniform_open(0x80000000, 0) == doctest::Approx(0.5));
}

TEST_CASE("keyed increments are reproducible and order independent") {
  const BrownianDriver a(42, 1e-3), b(42, 1e-3);
  std::vector<double> fwd, rev;
  for (std::uint64_t k = 0; k < 100; ++k) fwd.push_back(a.increment(3, 1, k));
  for (std::uint64_t k = 100; k-- > 0;) rev.push_back(b.increment(3, 1, k));
  std::reverse(rev.begin(), rev.end());
  CHECK(fwd == rev);
  CHECK(a.increment(3, 1, 5) != a.increment(3, 2, 5));
  CHECK(a.increment(3, 1, 5) != a.increment(4, 1, 5));
  CHECK(a.increment(3, 1, 5) != BrownianDriver(43, 1e-3).increment(3, 1, 5));
  CHECK(a.normal(0, 0, 0) != BrownianDriver(42, 1e-3, StreamFamily::precompute).normal(0, 0, 0));
  CHECK(a.increment(0, 0, 9) == doctest::Approx(std::sqrt(1e-3) * a.normal(0, 0, 9)));
}

TEST_CASE("coarse increments are sums of fine ones") {
  const BrownianDriver d(1, 1e-4);
  double s = 0.0;
  for (std::uint64_t k = 8; k < 12; ++k) s += d.increment(2, 0, k);
  CHECK(d.coarse_increment(2, 0, 2, 4) == s);
  CHECK(d.coarse_increment(2, 0, 7, 1) == d.increment(2, 0, 7));
}

TEST_CASE("stream audit passes on the generator") {
  const BrownianDriver d(7, 1e-3, StreamFamily::audit);
  const auto rep = gaussian_stream_audit(d, 200000);
  REQUIRE(rep.means.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(rep.means[i]) <= rep.mean_band);
    CHECK(std::abs(rep.variances[i] - 1.0) <= 0.05);
  }
  CHECK(rep.max_cross_correlation <= rep.correlation_band);
  CHECK_THROWS(gaussian_stream_audit(d, 10));
}

TEST_CASE("counter streams") {
  CounterStream a(5, 9), b(5, 9), c(5, 10);
  for (int i = 0; i < 10; ++i) {
    const double x = a.normal();
    CHECK(x == b.normal());
    CHECK(x != c.normal());
  }
  CounterStream u(1, 1);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = u.uniform();
    CHECK((v > 0.0 && v < 1.0));
    mean += v;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
}
