#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vgchaos {

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

// Mean with a standard error from contiguous batch means.
Estimate batch_mean(std::span<const double> values, int batches = 50);

// Apply fn to every value and estimate the mean of the result.
template <class Fn>
Estimate batch_mean_of(std::span<const double> values, Fn&& fn, int batches = 50) {
  std::vector<double> mapped(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mapped[i] = fn(values[i]);
  return batch_mean(mapped, batches);
}

// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace vgchaos
