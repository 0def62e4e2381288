#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bmf {

using Philox4x32Counter = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

// Philox4x32 with 10 rounds (Salmon et al., SC'11).
Philox4x32Counter philox4x32(Philox4x32Counter ctr, Philox4x32Key key);

// Uniform on (0, 1) with 52 random bits, never 0 or 1.
double uniform_open(std::uint32_t hi, std::uint32_t lo);

// Separates independent uses of one master seed.
enum class StreamFamily : std::uint32_t {
  trajectory = 0,
  precompute = 1,
  initial_state = 2,
  lab = 3,
  audit = 4,
};

/// Gaussian increments keyed by (repetition, particle, step).
///
/// The value for a key is a pure function of (master seed, family, key), so
/// any traversal order or thread assignment reproduces the same numbers.
class BrownianDriver {
 public:
  BrownianDriver(std::uint64_t master_seed, double dt,
                 StreamFamily family = StreamFamily::trajectory);

  std::uint64_t master_seed() const { return seed_; }
  double dt() const { return dt_; }
  StreamFamily family() const { return family_; }

  // Standard normal for a key.
  double normal(std::uint64_t repetition, std::uint32_t particle, std::uint64_t step) const;
  // N(0, dt) increment.
  double increment(std::uint64_t repetition, std::uint32_t particle, std::uint64_t step) const {
    return sqrt_dt_ * normal(repetition, particle, step);
  }
  // Sum of `factor` consecutive fine increments: the increment over coarse
  // step `step` of size factor * dt on the same Brownian path.
  double coarse_increment(std::uint64_t repetition, std::uint32_t particle, std::uint64_t step,
                          std::uint32_t factor) const;

 private:
  std::uint64_t seed_;
  double dt_;
  double sqrt_dt_;
  StreamFamily family_;
};

/// Sequential normal/uniform source for sampling random operators and states.
class CounterStream {
 public:
  CounterStream(std::uint64_t seed, std::uint32_t stream_id,
                StreamFamily family = StreamFamily::lab)
      : seed_(seed), stream_(stream_id), family_(family) {}

  double uniform();
  double normal();

 private:
  Philox4x32Counter draw();

  std::uint64_t seed_;
  std::uint32_t stream_;
  StreamFamily family_;
  std::uint64_t counter_ = 0;
};

class AuditFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StreamAuditReport {
  std::size_t n_samples = 0;
  std::vector<double> means;      // per stream
  std::vector<double> variances;  // per stream, in units of dt
  double max_cross_correlation = 0.0;
  double mean_band = 0.0;         // 4 sigma / sqrt(n)
  double correlation_band = 0.0;  // 4 / sqrt(n)
};

// Checks per-stream moments and cross-stream correlation of `n_streams`
// particle streams of repetition 0. Throws AuditFailure on a violation.
StreamAuditReport gaussian_stream_audit(const BrownianDriver& driver, std::size_t n_samples,
                                        std::uint32_t n_streams = 3);

}  // namespace bmf
