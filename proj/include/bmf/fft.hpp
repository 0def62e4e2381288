#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace bmf {

/// In-place complex FFT over a hypercube of `rank` axes of length `n`.
///
/// Plans are created once per (rank, n) with FFTW_ESTIMATE so the selected
/// algorithm, and therefore every bit of the output, does not depend on
/// timing. Execution is safe from concurrent threads.
class FftPlan {
 public:
  FftPlan(int rank, std::size_t n);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  int rank() const { return rank_; }
  std::size_t n() const { return n_; }
  std::size_t size() const { return size_; }

  void forward(std::span<std::complex<double>> data) const;
  // Unnormalized inverse; divide by size() to undo forward().
  void backward(std::span<std::complex<double>> data) const;

 private:
  int rank_;
  std::size_t n_;
  std::size_t size_;
  void* forward_plan_ = nullptr;
  void* backward_plan_ = nullptr;
};

const FftPlan& fft_plan(int rank, std::size_t n);

}  // namespace bmf
