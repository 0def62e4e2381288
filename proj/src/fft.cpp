#include "bmf/fft.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace bmf {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(int rank, std::size_t n) : rank_(rank), n_(n), size_(1) {
  if (rank < 1 || n < 1) throw std::invalid_argument("FftPlan: bad shape");
  std::vector<int> dims(static_cast<std::size_t>(rank), static_cast<int>(n));
  for (int r = 0; r < rank; ++r) size_ *= n;

  std::lock_guard<std::mutex> lock(planner_mutex());
  auto* buf = fftw_alloc_complex(size_);
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  forward_plan_ = fftw_plan_dft(rank, dims.data(), buf, buf, FFTW_FORWARD, flags);
  backward_plan_ = fftw_plan_dft(rank, dims.data(), buf, buf, FFTW_BACKWARD, flags);
  fftw_free(buf);
  if (!forward_plan_ || !backward_plan_) throw std::runtime_error("FftPlan: planning failed");
}

FftPlan::~FftPlan() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (backward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(backward_plan_));
}

void FftPlan::forward(std::span<std::complex<double>> data) const {
  if (data.size() != size_) throw std::invalid_argument("FftPlan: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(forward_plan_), p, p);
}

void FftPlan::backward(std::span<std::complex<double>> data) const {
  if (data.size() != size_) throw std::invalid_argument("FftPlan: size mismatch");
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(static_cast<fftw_plan>(backward_plan_), p, p);
}

const FftPlan& fft_plan(int rank, std::size_t n) {
  static std::mutex cache_mutex;
  static std::map<std::pair<int, std::size_t>, std::unique_ptr<FftPlan>> cache;
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto& slot = cache[{rank, n}];
  if (!slot) slot = std::make_unique<FftPlan>(rank, n);
  return *slot;
}

}  // namespace bmf
