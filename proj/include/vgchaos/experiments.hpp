#pragma once

#include <cstdint>
#include <vector>

#include "vgchaos/chaos2.hpp"
#include "vgchaos/empirical.hpp"

namespace vgchaos {

// A_n = exact symmetrized-Gamma kernel + P / n, P a fixed symmetric matrix.
struct SixMomentConfig {
  double lambda = 0.5;
  int m = 2;
  std::vector<int> ns{1, 2, 4, 8, 16, 32, 64};
  double perturbation_norm = 0.5;
  std::size_t n_mc = 1'000'000;
  std::uint64_t seed = 1;
};
struct SixMomentRow {
  int n = 0;
  double m2_gap = 0, m4_gap = 0, m6_gap = 0;
  double bound_interior = 0, bound_total = 0;
  double empirical_dw = 0;
};
Kernel2 six_moment_kernel(const SixMomentConfig& c, int n);
std::vector<SixMomentRow> run_six_moment(const SixMomentConfig& c);

// 2n eigenvalues +-1/sqrt(2n) scaled to the target variance.
struct CltConfig {
  std::vector<int> ns{1, 2, 4, 8, 16, 32, 64};
  double variance = 2.0;
};
struct CltRow {
  int n = 0;
  double T = 0, sqrt_T = 0, variance_gap = 0, total = 0;
};
Kernel2 clt_kernel(int n, double variance);
std::vector<CltRow> run_clt(const CltConfig& c);

struct UniversalityConfig {
  std::vector<int> ns{10, 30, 100};
  std::size_t n_draws = 1'000'000;
  std::uint64_t seed = 1;
  BaseLaw base = BaseLaw::rademacher;
};
struct UniversalityRow {
  int n = 0;
  double w1 = 0;        // base law against Gaussian base
  double variance = 0;  // exact E[H^2]
};
std::vector<UniversalityRow> run_universality(const UniversalityConfig& c);

}  // namespace vgchaos
