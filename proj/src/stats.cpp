#include "vgchaos/stats.hpp"

#include <cmath>
#include <stdexcept>

#include "vgchaos/summation.hpp"

namespace vgchaos {

Estimate batch_mean(std::span<const double> values, int batches) {
  const std::size_t n = values.size();
  if (batches < 2) throw std::invalid_argument("batch_mean: need at least 2 batches");
  if (n < static_cast<std::size_t>(batches))
    throw std::invalid_argument("batch_mean: fewer values than batches");
  std::vector<double> means(batches);
  std::vector<double> sizes(batches);
  for (int b = 0; b < batches; ++b) {
    const std::size_t lo = n * b / batches;
    const std::size_t hi = n * (b + 1) / batches;
    means[b] = compensated_mean(values.subspan(lo, hi - lo));
    sizes[b] = static_cast<double>(hi - lo);
  }
  CompensatedSum total;
  for (int b = 0; b < batches; ++b) total.add(means[b] * sizes[b]);
  const double mean = total.value() / static_cast<double>(n);
  CompensatedSum ss;
  for (int b = 0; b < batches; ++b) ss.add((means[b] - mean) * (means[b] - mean));
  const double var_of_batch = ss.value() / (batches - 1);
  return {mean, std::sqrt(var_of_batch / batches)};
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("loglog_slope: need matching inputs with at least 2 points");
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0))
      throw std::invalid_argument("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace vgchaos
