#include "bmf/brownian.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace bmf {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

Philox4x32Key split_key(std::uint64_t seed) {
  return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

}  // namespace

Philox4x32Counter philox4x32(Philox4x32Counter c, Philox4x32Key k) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, c[0], hi0, lo0);
    mulhilo(kMul1, c[2], hi1, lo1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeyl0;
    k[1] += kWeyl1;
  }
  return c;
}

double uniform_open(std::uint32_t hi, std::uint32_t lo) {
  // 52 bits so that bits + 0.5 stays exact below 2^53.
  const std::uint64_t bits = ((static_cast<std::uint64_t>(hi) << 32) | lo) >> 12;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

namespace {

double box_muller(const Philox4x32Counter& r) {
  const double u1 = uniform_open(r[0], r[1]);
  const double u2 = uniform_open(r[2], r[3]);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

BrownianDriver::BrownianDriver(std::uint64_t master_seed, double dt, StreamFamily family)
    : seed_(master_seed), dt_(dt), sqrt_dt_(std::sqrt(dt)), family_(family) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("BrownianDriver: dt must be positive");
}

double BrownianDriver::normal(std::uint64_t repetition, std::uint32_t particle,
                              std::uint64_t step) const {
  if (step > 0xFFFFFFFFull || repetition > 0xFFFFFFFFull)
    throw std::out_of_range("BrownianDriver: key exceeds 32 bits");
  const Philox4x32Counter ctr{static_cast<std::uint32_t>(step), particle,
                              static_cast<std::uint32_t>(repetition),
                              static_cast<std::uint32_t>(family_)};
  return box_muller(philox4x32(ctr, split_key(seed_)));
}

double BrownianDriver::coarse_increment(std::uint64_t repetition, std::uint32_t particle,
                                        std::uint64_t step, std::uint32_t factor) const {
  double s = 0.0;
  for (std::uint32_t i = 0; i < factor; ++i) s += increment(repetition, particle, step * factor + i);
  return s;
}

Philox4x32Counter CounterStream::draw() {
  const Philox4x32Counter ctr{static_cast<std::uint32_t>(counter_),
                              static_cast<std::uint32_t>(counter_ >> 32), stream_,
                              static_cast<std::uint32_t>(family_)};
  ++counter_;
  return philox4x32(ctr, split_key(seed_));
}

double CounterStream::uniform() {
  const auto r = draw();
  return uniform_open(r[0], r[1]);
}

double CounterStream::normal() { return box_muller(draw()); }

StreamAuditReport gaussian_stream_audit(const BrownianDriver& driver, std::size_t n_samples,
                                        std::uint32_t n_streams) {
  if (n_samples < 100000 || n_streams < 1) throw std::invalid_argument("audit: needs at least 1e5 samples per stream");
  const double n = static_cast<double>(n_samples);
  const double dt = driver.dt();

  std::vector<std::vector<double>> x(n_streams, std::vector<double>(n_samples));
  for (std::uint32_t s = 0; s < n_streams; ++s)
    for (std::size_t i = 0; i < n_samples; ++i) x[s][i] = driver.increment(0, s, i);

  StreamAuditReport rep;
  rep.n_samples = n_samples;
  rep.mean_band = 4.0 * std::sqrt(dt) / std::sqrt(n);
  rep.correlation_band = 4.0 / std::sqrt(n);
  std::ostringstream err;
  for (std::uint32_t s = 0; s < n_streams; ++s) {
    double m = 0.0;
    for (double v : x[s]) m += v;
    m /= n;
    double var = 0.0;
    for (double v : x[s]) var += (v - m) * (v - m);
    var /= (n - 1.0);
    rep.means.push_back(m);
    rep.variances.push_back(var / dt);
    if (std::abs(m) > rep.mean_band) err << "stream " << s << " mean " << m << "; ";
    if (std::abs(var / dt - 1.0) > 0.05) err << "stream " << s << " variance/dt " << var / dt << "; ";
  }
  for (std::uint32_t a = 0; a < n_streams; ++a)
    for (std::uint32_t b = a + 1; b < n_streams; ++b) {
      double sab = 0.0, saa = 0.0, sbb = 0.0;
      for (std::size_t i = 0; i < n_samples; ++i) {
        const double u = x[a][i] - rep.means[a], v = x[b][i] - rep.means[b];
        sab += u * v;
        saa += u * u;
        sbb += v * v;
      }
      const double r = sab / std::sqrt(saa * sbb);
      rep.max_cross_correlation = std::max(rep.max_cross_correlation, std::abs(r));
      if (std::abs(r) > rep.correlation_band) err << "streams " << a << "," << b << " correlation " << r << "; ";
    }
  if (!err.str().empty()) throw AuditFailure("gaussian stream audit failed: " + err.str());
  return rep;
}

}  // namespace bmf
