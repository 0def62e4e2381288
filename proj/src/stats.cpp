#include "bmf/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace bmf {

namespace {
constexpr double z95 = 1.959963984540054;
}

SampleSummary summarize(std::span<const double> x) {
  SampleSummary s;
  s.n = x.size();
  if (x.empty()) return s;
  double sum = 0.0;
  for (double v : x) sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n >= 2) {
    double ss = 0.0;
    for (double v : x) ss += (v - s.mean) * (v - s.mean);
    s.standard_error = std::sqrt(ss / static_cast<double>(s.n - 1) / static_cast<double>(s.n));
  }
  s.ci_low = s.mean - z95 * s.standard_error;
  s.ci_high = s.mean + z95 * s.standard_error;
  return s;
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("ols_fit: need two or more points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw std::invalid_argument("ols_fit: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (x.size() > 2) {
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      rss += r * r;
    }
    f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
  }
  f.slope_ci_low = f.slope - z95 * f.slope_se;
  f.slope_ci_high = f.slope + z95 * f.slope_se;
  return f;
}

}  // namespace bmf
