#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vgchaos/chaos2.hpp"
#include "vgchaos/report.hpp"
#include "vgchaos/vgdist.hpp"

namespace vgchaos {

struct SampleSet {
  std::vector<double> values;
  std::uint64_t seed = 0;
  std::string meta;

  SampleSet() = default;
  // Rejects non-finite values.
  SampleSet(std::vector<double> values, std::uint64_t seed, std::string meta);

  std::size_t size() const { return values.size(); }
  // One value per line, preceded by a '#' comment carrying seed and meta.
  void write_csv(std::ostream& os) const;
};

// Sorted L1 coupling. Sets of different sizes are both trimmed to the smaller size.
double wasserstein_1d(const SampleSet& a, const SampleSet& b);
double wasserstein_1d(std::span<const double> a, std::span<const double> b);
// mean |x_(i) - Q((i - 1/2)/n)|
double wasserstein_to_vg(const SampleSet& s, const VGParams& p);
double wasserstein_to_vg(std::span<const double> s, const VGParams& p);

struct KStatistics {
  CumulantSet kappa;
  std::array<double, 6> std_error{};
  std::size_t n = 0;
};
// Unbiased k-statistics k1..k6; standard errors from 50 batch estimates.
KStatistics k_statistics(std::span<const double> values, int batches = 50);
inline KStatistics k_statistics(const SampleSet& s, int batches = 50) {
  return k_statistics(std::span<const double>(s.values), batches);
}

// Symmetric coefficients h(i1..iq) over {0..n-1}, zero whenever two indices coincide.
class HomogeneousCoeff {
 public:
  HomogeneousCoeff(int n, int q, std::vector<double> data);
  // q = 2 from a symmetric matrix with zero diagonal.
  static HomogeneousCoeff from_matrix(const Eigen::MatrixXd& h);

  int n() const { return n_; }
  int q() const { return q_; }
  const std::vector<double>& data() const { return data_; }
  // Second-chaos kernel of the Gaussian-base sum (q = 2 only).
  Kernel2 kernel2() const;
  // E[H^2] = q! sum over ordered tuples of h^2
  double variance() const;

 private:
  int n_, q_;
  std::vector<double> data_;
};

enum class BaseLaw { gaussian, rademacher, uniform };
BaseLaw parse_base_law(const std::string& s);
std::string to_string(BaseLaw b);

// Draws of sum over all ordered tuples h(i1..iq) X_{i1} ... X_{iq}.
SampleSet homogeneous_sum(const HomogeneousCoeff& c, BaseLaw base, std::size_t n_draws,
                          std::uint64_t seed);

// Two diagonal-free blocks of size m = n/2 with entries +1/m and -1/m.
HomogeneousCoeff universality_family(int n);

// A(j), B(i,j) by Monte Carlo at common Gaussian draws plus exact Cov(F_i^2, F_j^2).
BoundReport multivariate_bound(const std::vector<Kernel2>& kernels,
                               const std::vector<VGParams>& targets, std::size_t n_mc,
                               std::uint64_t seed);

}  // namespace vgchaos
