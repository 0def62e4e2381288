#pragma once

#include <span>

namespace bmf {

struct SampleSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double standard_error = 0.0;  // sample sd / sqrt(n); 0 for n < 2
  double ci_low = 0.0;          // 95% normal interval
  double ci_high = 0.0;
};

SampleSummary summarize(std::span<const double> x);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  double slope_ci_low = 0.0;
  double slope_ci_high = 0.0;
};

// Ordinary least squares y = intercept + slope x; needs at least 3 points
// for a standard error (2 points give an exact line with se 0).
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

}  // namespace bmf
