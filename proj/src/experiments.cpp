#include "vgchaos/experiments.hpp"

#include <cmath>
#include <stdexcept>

#include "vgchaos/rng.hpp"

namespace vgchaos {

namespace {

Eigen::MatrixXd perturbation(int d, double norm, std::uint64_t seed) {
  Philox4x32 rng(derive_seed(seed, 0x5e7), 0);
  Eigen::MatrixXd p(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j <= i; ++j) p(i, j) = p(j, i) = rng.normal();
  return p * (norm / p.norm());
}

void check_ns(const std::vector<int>& ns, const char* who) {
  if (ns.empty()) throw std::invalid_argument(std::string(who) + ": empty sequence");
  for (int n : ns)
    if (n < 1) throw std::invalid_argument(std::string(who) + ": indices must be >= 1");
}

}  // namespace

Kernel2 six_moment_kernel(const SixMomentConfig& c, int n) {
  const Kernel2 exact = exact_symgamma_kernel(c.m, c.lambda).embed();
  const Eigen::MatrixXd p = perturbation(exact.dim(), c.perturbation_norm, c.seed);
  return Kernel2(exact.matrix() + p / static_cast<double>(n));
}

std::vector<SixMomentRow> run_six_moment(const SixMomentConfig& c) {
  check_ns(c.ns, "six_moment");
  const VGParams target = special::sym_gamma(c.lambda, 0.5 * c.m);
  std::vector<SixMomentRow> rows;
  for (int n : c.ns) {
    const Kernel2 a = six_moment_kernel(c, n);
    const auto sm = six_moment_check(a, target);
    const auto b = vg_bound2(a, target);
    SixMomentRow row;
    row.n = n;
    for (std::size_t k = 0; k < sm.orders.size(); ++k) {
      if (sm.orders[k] == 2) row.m2_gap = sm.gaps[k];
      if (sm.orders[k] == 4) row.m4_gap = sm.gaps[k];
      if (sm.orders[k] == 6) row.m6_gap = sm.gaps[k];
    }
    row.bound_interior = b.term("interior");
    row.bound_total = b.total;
    // Same seed for every n: common Gaussian draws across the sequence.
    const auto paths = simulate_gamma_paths(a, c.n_mc, c.seed);
    row.empirical_dw = wasserstein_to_vg(paths.f, target);
    rows.push_back(row);
  }
  return rows;
}

Kernel2 clt_kernel(int n, double variance) {
  if (n < 1) throw std::invalid_argument("clt_kernel: n must be >= 1");
  if (!(variance > 0.0)) throw std::invalid_argument("clt_kernel: variance must be > 0");
  const double e = std::sqrt(variance / (4.0 * n));
  std::vector<double> diag(2 * static_cast<std::size_t>(n), e);
  for (int i = n; i < 2 * n; ++i) diag[i] = -e;
  return Kernel2::diagonal(diag);
}

std::vector<CltRow> run_clt(const CltConfig& c) {
  check_ns(c.ns, "clt");
  std::vector<CltRow> rows;
  for (int n : c.ns) {
    const auto b = gauss_bound2(clt_kernel(n, c.variance), c.variance);
    rows.push_back({n, b.term("T"), b.term("sqrt_T"), b.term("variance_gap"), b.total});
  }
  return rows;
}

std::vector<UniversalityRow> run_universality(const UniversalityConfig& c) {
  check_ns(c.ns, "universality");
  std::vector<UniversalityRow> rows;
  for (int n : c.ns) {
    const auto h = universality_family(n);
    const auto g = homogeneous_sum(h, BaseLaw::gaussian, c.n_draws, derive_seed(c.seed, 2 * n));
    const auto x = homogeneous_sum(h, c.base, c.n_draws, derive_seed(c.seed, 2 * n + 1));
    rows.push_back({n, wasserstein_1d(x, g), h.variance()});
  }
  return rows;
}

}  // namespace vgchaos
