// Serial reference kernels against their OpenMP versions on N-body sized
// buffers (n = 32 points per particle, N = 2..4).

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bmf/kernels.hpp"
#include "bmf/meanfield.hpp"
#include "bmf/nbody.hpp"

namespace k = bmf::kernels;
using bmf::cplx;

namespace {

constexpr std::size_t m = 32;

std::size_t pow_m(std::size_t N) {
  std::size_t s = 1;
  for (std::size_t i = 0; i < N; ++i) s *= m;
  return s;
}

std::vector<cplx> random_buffer(std::size_t size) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<cplx> v(size);
  for (auto& z : v) z = cplx(n(rng), n(rng));
  return v;
}

template <bool Omp>
void BM_multiply(benchmark::State& st) {
  auto v = random_buffer(pow_m(st.range(0)));
  const auto f = random_buffer(v.size());
  for (auto _ : st) {
    if constexpr (Omp) k::omp::multiply(v, f);
    else k::serial::multiply(v, f);
    benchmark::DoNotOptimize(v.data());
  }
  st.SetBytesProcessed(st.iterations() * v.size() * sizeof(cplx) * 2);
}

template <bool Omp>
void BM_squared_norm(benchmark::State& st) {
  const auto v = random_buffer(pow_m(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(Omp ? k::omp::squared_norm(v) : k::serial::squared_norm(v));
  st.SetBytesProcessed(st.iterations() * v.size() * sizeof(cplx));
}

template <bool Omp>
void BM_separable_update(benchmark::State& st) {
  const std::size_t N = st.range(0);
  auto v = random_buffer(pow_m(N));
  auto c = random_buffer(N * m);
  for (auto& z : c) z *= 1e-3;
  for (auto _ : st) {
    if constexpr (Omp) k::omp::separable_update(v, N, m, c);
    else k::serial::separable_update(v, N, m, c);
    benchmark::DoNotOptimize(v.data());
  }
}

template <bool Omp>
void BM_first_marginal(benchmark::State& st) {
  const auto v = random_buffer(pow_m(st.range(0)));
  const std::size_t rest = v.size() / m;
  for (auto _ : st) {
    auto r = Omp ? k::omp::first_marginal(v, m, rest) : k::serial::first_marginal(v, m, rest);
    benchmark::DoNotOptimize(r.data().data());
  }
}

template <bool Parallel>
void BM_nbody_step(benchmark::State& st) {
  const std::size_t N = st.range(0);
  const bmf::GridSpec g(1, m, 20.0);
  const bmf::Physics phys{bmf::CouplingOperator::cosine(g, 1.0), bmf::PotentialSpec::gaussian(g, 1.0, 1.0)};
  const bmf::NBodyStepper stepper(g, N, bmf::SchemeParams{}, phys, 4096, Parallel);
  auto psi = bmf::WaveFunctionNP::tensor_power(bmf::gaussian_packet(g, 0.0, 1.0), N);
  const std::vector<double> dW(N, 0.01);
  for (auto _ : st) benchmark::DoNotOptimize(stepper.step(psi, dW));
}

}  // namespace

BENCHMARK(BM_multiply<false>)->Name("multiply/serial")->DenseRange(2, 4);
BENCHMARK(BM_multiply<true>)->Name("multiply/omp")->DenseRange(2, 4);
BENCHMARK(BM_squared_norm<false>)->Name("squared_norm/serial")->DenseRange(2, 4);
BENCHMARK(BM_squared_norm<true>)->Name("squared_norm/omp")->DenseRange(2, 4);
BENCHMARK(BM_separable_update<false>)->Name("separable_update/serial")->DenseRange(2, 4);
BENCHMARK(BM_separable_update<true>)->Name("separable_update/omp")->DenseRange(2, 4);
BENCHMARK(BM_first_marginal<false>)->Name("first_marginal/serial")->DenseRange(2, 3);
BENCHMARK(BM_first_marginal<true>)->Name("first_marginal/omp")->DenseRange(2, 3);
BENCHMARK(BM_nbody_step<false>)->Name("nbody_step/serial")->DenseRange(2, 3)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_nbody_step<true>)->Name("nbody_step/omp")->DenseRange(2, 3)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
