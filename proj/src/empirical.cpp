#include "vgchaos/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vgchaos/errors.hpp"
#include "vgchaos/rng.hpp"
#include "vgchaos/stats.hpp"
#include "vgchaos/summation.hpp"

namespace vgchaos {

SampleSet::SampleSet(std::vector<double> v, std::uint64_t s, std::string m)
    : values(std::move(v)), seed(s), meta(std::move(m)) {
  for (double x : values)
    if (!std::isfinite(x)) throw std::invalid_argument("SampleSet: non-finite value");
}

void SampleSet::write_csv(std::ostream& os) const {
  const auto prec = os.precision(17);
  os << "# seed=" << seed << " n=" << values.size();
  if (!meta.empty()) os << ' ' << meta;
  os << "\nvalue\n";
  for (double x : values) os << x << '\n';
  os.precision(prec);
}

namespace {

std::vector<double> sorted_copy(std::span<const double> v, std::size_t n) {
  std::vector<double> out(v.begin(), v.end());
  if (n < out.size()) {
    // Trimming keeps the leading draws so the result does not depend on order statistics.
    out.resize(n);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

double wasserstein_1d(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("wasserstein_1d: empty sample");
  const std::size_t n = std::min(a.size(), b.size());
  const auto x = sorted_copy(a, n);
  const auto y = sorted_copy(b, n);
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) s += std::abs(x[i] - y[i]);
  return s.value() / static_cast<double>(n);
}

double wasserstein_1d(const SampleSet& a, const SampleSet& b) {
  return wasserstein_1d(std::span<const double>(a.values), std::span<const double>(b.values));
}

double wasserstein_to_vg(std::span<const double> s, const VGParams& p) {
  if (s.empty()) throw std::invalid_argument("wasserstein_to_vg: empty sample");
  const std::size_t n = s.size();
  const auto x = sorted_copy(s, n);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) u[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
  const auto q = vg_cdf_table(p)->quantiles_sorted(u);
  CompensatedSum acc;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(x[i] - q[i]);
  return acc.value() / static_cast<double>(n);
}

double wasserstein_to_vg(const SampleSet& s, const VGParams& p) {
  return wasserstein_to_vg(std::span<const double>(s.values), p);
}

// ---- k-statistics -------------------------------------------------------

namespace {

// Set partitions of {0..k-1} as restricted growth strings.
std::vector<std::vector<int>> set_partitions(int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> a(k, 0);
  auto rec = [&](auto& self, int i, int maxb) -> void {
    if (i == k) {
      out.push_back(a);
      return;
    }
    for (int b = 0; b <= maxb + 1; ++b) {
      a[i] = b;
      self(self, i + 1, std::max(maxb, b));
    }
  };
  if (k == 0) return {{}};
  a[0] = 0;
  rec(rec, 1, 0);
  return out;
}

int block_count(const std::vector<int>& p) {
  return p.empty() ? 0 : *std::max_element(p.begin(), p.end()) + 1;
}

double mobius_weight(const std::vector<int>& p) {
  std::vector<int> sizes(block_count(p), 0);
  for (int b : p) ++sizes[b];
  double w = 1.0;
  for (int s : sizes) w *= (s % 2 == 1 ? 1.0 : -1.0) * std::tgamma(s);
  return w;
}

// Sum over pairwise distinct indices of prod_j x_{i_j}^{e_j}, from power sums S[1..6].
double augmented_sum(const std::vector<int>& e, const std::array<double, 7>& S) {
  const int k = static_cast<int>(e.size());
  double total = 0.0;
  for (const auto& p : set_partitions(k)) {
    std::vector<int> deg(block_count(p), 0);
    for (int j = 0; j < k; ++j) deg[p[j]] += e[j];
    double prod = mobius_weight(p);
    for (int d : deg) prod *= S[d];
    total += prod;
  }
  return total;
}

double falling(double n, int k) {
  double v = 1.0;
  for (int i = 0; i < k; ++i) v *= n - i;
  return v;
}

// k_1..k_6 of one sample.
std::array<double, 6> kstats_once(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  CompensatedSum m;
  for (double v : x) m += v;
  const double mean = m.value() / n;
  std::array<CompensatedSum, 7> ps;
  for (double v : x) {
    const double d = v - mean;
    double p = 1.0;
    for (int j = 1; j <= 6; ++j) {
      p *= d;
      ps[j] += p;
    }
  }
  std::array<double, 7> S{};
  for (int j = 1; j <= 6; ++j) S[j] = ps[j].value();

  std::array<double, 6> k{};
  k[0] = mean;
  for (int r = 2; r <= 6; ++r) {
    double acc = 0.0;
    for (const auto& pi : set_partitions(r)) {
      const int nb = block_count(pi);
      std::vector<int> e(nb, 0);
      for (int b : pi) ++e[b];
      const double sign = (nb % 2 == 1 ? 1.0 : -1.0) * std::tgamma(nb);
      acc += sign * augmented_sum(e, S) / falling(n, nb);
    }
    k[r - 1] = acc;
  }
  return k;
}

}  // namespace

KStatistics k_statistics(std::span<const double> values, int batches) {
  if (values.size() < 7) throw std::invalid_argument("k_statistics: need at least 7 values");
  KStatistics out;
  out.n = values.size();
  out.kappa.kappa = kstats_once(values);
  if (batches >= 2 && values.size() / static_cast<std::size_t>(batches) >= 7) {
    const std::size_t len = values.size() / static_cast<std::size_t>(batches);
    std::vector<std::array<double, 6>> ks;
    for (int b = 0; b < batches; ++b) ks.push_back(kstats_once(values.subspan(b * len, len)));
    for (int j = 0; j < 6; ++j) {
      double mu = 0.0;
      for (const auto& k : ks) mu += k[j];
      mu /= batches;
      double ss = 0.0;
      for (const auto& k : ks) ss += (k[j] - mu) * (k[j] - mu);
      // Batch spread scaled from batch size to the full sample.
      const double sd_batch = std::sqrt(ss / (batches - 1));
      out.std_error[j] = sd_batch / std::sqrt(static_cast<double>(batches));
    }
  }
  return out;
}

// ---- homogeneous sums ---------------------------------------------------

namespace {

std::size_t ipow(int n, int q) {
  std::size_t v = 1;
  for (int i = 0; i < q; ++i) v *= static_cast<std::size_t>(n);
  return v;
}

}  // namespace

HomogeneousCoeff::HomogeneousCoeff(int n, int q, std::vector<double> data)
    : n_(n), q_(q), data_(std::move(data)) {
  if (n < 1 || q < 1) throw std::invalid_argument("HomogeneousCoeff: n and q must be positive");
  if (data_.size() != ipow(n, q))
    throw std::invalid_argument("HomogeneousCoeff: data size must be n^q");
  std::vector<int> idx(q);
  for (std::size_t k = 0; k < data_.size(); ++k) {
    std::size_t rem = k;
    for (int j = q - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(rem % n);
      rem /= n;
    }
    const double v = data_[k];
    bool repeated = false;
    for (int a = 0; a < q && !repeated; ++a)
      for (int b = a + 1; b < q; ++b)
        if (idx[a] == idx[b]) {
          repeated = true;
          break;
        }
    if (repeated && v != 0.0)
      throw std::invalid_argument("HomogeneousCoeff: nonzero coefficient on a repeated index");
    for (int a = 0; a + 1 < q; ++a) {
      auto sw = idx;
      std::swap(sw[a], sw[a + 1]);
      std::size_t f = 0;
      for (int j = 0; j < q; ++j) f = f * n + sw[j];
      if (std::abs(data_[f] - v) > 1e-12 * std::max(1.0, std::abs(v)))
        throw std::invalid_argument("HomogeneousCoeff: coefficients are not symmetric");
    }
  }
}

HomogeneousCoeff HomogeneousCoeff::from_matrix(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw std::invalid_argument("HomogeneousCoeff: matrix must be square");
  const int n = static_cast<int>(h.rows());
  std::vector<double> d(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) d[static_cast<std::size_t>(i) * n + j] = h(i, j);
  return HomogeneousCoeff(n, 2, std::move(d));
}

Kernel2 HomogeneousCoeff::kernel2() const {
  if (q_ != 2) throw UnsupportedError("HomogeneousCoeff::kernel2: q must be 2");
  return Kernel2(Eigen::Map<const Eigen::MatrixXd>(data_.data(), n_, n_));
}

double HomogeneousCoeff::variance() const {
  CompensatedSum s;
  for (double v : data_) s += v * v;
  return std::tgamma(q_ + 1.0) * s.value();
}

BaseLaw parse_base_law(const std::string& s) {
  if (s == "gaussian") return BaseLaw::gaussian;
  if (s == "rademacher") return BaseLaw::rademacher;
  if (s == "uniform") return BaseLaw::uniform;
  throw std::invalid_argument("unknown base law: " + s);
}

std::string to_string(BaseLaw b) {
  switch (b) {
    case BaseLaw::gaussian: return "gaussian";
    case BaseLaw::rademacher: return "rademacher";
    case BaseLaw::uniform: return "uniform";
  }
  return "?";
}

namespace {

double draw(Philox4x32& rng, BaseLaw b) {
  switch (b) {
    case BaseLaw::gaussian: return rng.normal();
    case BaseLaw::rademacher: return rng.rademacher();
    case BaseLaw::uniform: return std::sqrt(12.0) * (rng.uniform() - 0.5);
  }
  return 0.0;
}

}  // namespace

SampleSet homogeneous_sum(const HomogeneousCoeff& c, BaseLaw base, std::size_t n_draws,
                          std::uint64_t seed) {
  const int n = c.n(), q = c.q();
  std::vector<double> out(n_draws);
  if (q == 2) {
    const Eigen::Map<const Eigen::MatrixXd> h(c.data().data(), n, n);
    for_each_chunk(n_draws, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
      const Eigen::Index m = static_cast<Eigen::Index>(e - b);
      Eigen::MatrixXd x(n, m);
      for (Eigen::Index k = 0; k < m; ++k)
        for (int i = 0; i < n; ++i) x(i, k) = draw(rng, base);
      const Eigen::MatrixXd y = h * x;
      const Eigen::VectorXd v = (x.array() * y.array()).colwise().sum().transpose();
      for (Eigen::Index k = 0; k < m; ++k) out[b + k] = v(k);
    });
  } else {
    for_each_chunk(n_draws, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
      std::vector<double> x(n), buf;
      for (std::size_t k = b; k < e; ++k) {
        for (int i = 0; i < n; ++i) x[i] = draw(rng, base);
        // Contract the last slot against x repeatedly.
        buf = c.data();
        std::size_t len = buf.size();
        for (int j = 0; j < q; ++j) {
          const std::size_t next = len / n;
          for (std::size_t a = 0; a < next; ++a) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += buf[a * n + i] * x[i];
            buf[a] = s;
          }
          len = next;
        }
        out[k] = buf[0];
      }
    });
  }
  std::ostringstream meta;
  meta << "homogeneous_sum base=" << to_string(base) << " n=" << n << " q=" << q;
  return SampleSet(std::move(out), seed, meta.str());
}

HomogeneousCoeff universality_family(int n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("universality_family: n must be even and >= 4");
  const int m = n / 2;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      if (i != j) {
        h(i, j) = 1.0 / m;
        h(m + i, m + j) = -1.0 / m;
      }
  return HomogeneousCoeff::from_matrix(h);
}

// ---- multivariate -------------------------------------------------------

BoundReport multivariate_bound(const std::vector<Kernel2>& kernels,
                               const std::vector<VGParams>& targets, std::size_t n_mc,
                               std::uint64_t seed) {
  const std::size_t k = kernels.size();
  if (k == 0) throw std::invalid_argument("multivariate_bound: no components");
  if (targets.size() != k) throw std::invalid_argument("multivariate_bound: one target per kernel");
  const int d = kernels[0].dim();
  for (const auto& a : kernels)
    if (a.dim() != d) throw std::invalid_argument("multivariate_bound: kernels differ in dimension");
  for (const auto& t : targets)
    if (t.mu != 0.0) throw UnsupportedError("multivariate_bound: targets must have mu = 0");
  if (n_mc < 100) throw std::invalid_argument("multivariate_bound: n_mc too small");

  const std::size_t npairs = k * (k - 1) / 2;
  std::vector<std::vector<double>> a_vals(k, std::vector<double>(n_mc));
  std::vector<std::vector<double>> b_vals(npairs, std::vector<double>(n_mc));
  std::vector<double> traces(k);
  for (std::size_t j = 0; j < k; ++j) traces[j] = kernels[j].matrix().trace();

  for_each_chunk(n_mc, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    const Eigen::Index m = static_cast<Eigen::Index>(e - b);
    Eigen::MatrixXd z(d, m);
    for (Eigen::Index c = 0; c < m; ++c)
      for (int i = 0; i < d; ++i) z(i, c) = rng.normal();
    std::vector<Eigen::MatrixXd> w(k);
    for (std::size_t j = 0; j < k; ++j) {
      w[j] = kernels[j].matrix() * z;
      const Eigen::MatrixXd w2 = kernels[j].matrix() * w[j];
      const Eigen::VectorXd f = (z.array() * w[j].array()).colwise().sum().transpose();
      const Eigen::VectorXd g2 = 2.0 * w[j].colwise().squaredNorm().transpose();
      const Eigen::VectorXd g3 = 4.0 * (w[j].array() * w2.array()).colwise().sum().transpose();
      for (Eigen::Index c = 0; c < m; ++c)
        a_vals[j][b + c] = std::abs(stein_integrand(targets[j], f(c) - traces[j], g2(c), g3(c)));
    }
    std::size_t p = 0;
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t j = i + 1; j < k; ++j, ++p) {
        const Eigen::VectorXd g = 2.0 * (w[i].array() * w[j].array()).colwise().sum().transpose();
        for (Eigen::Index c = 0; c < m; ++c) b_vals[p][b + c] = std::abs(g(c));
      }
  });

  BoundReport rep;
  rep.kind = "multivariate";
  double sum_a = 0.0, sum_b = 0.0, sum_cov = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    const Estimate l1 = batch_mean(a_vals[j]);
    const double gap = std::abs(targets[j].variance() - cumulant2(kernels[j], 2));
    rep.add("A(" + std::to_string(j) + ")", l1.mean + gap, l1.std_error);
    sum_a += l1.mean + gap;
  }
  std::size_t p = 0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j, ++p) {
      const Estimate be = batch_mean(b_vals[p]);
      const std::string tag = "(" + std::to_string(i) + "," + std::to_string(j) + ")";
      rep.add("B" + tag, be.mean, be.std_error);
      const double cv = cov_squares(kernels[i], kernels[j]);
      rep.add("cov" + tag, cv);
      // Ordered pairs i != j count each unordered pair twice.
      sum_b += 2.0 * be.mean;
      sum_cov += 2.0 * cv;
    }
  rep.add("sum_A", sum_a);
  rep.add("sum_B", sum_b);
  rep.add("sum_cov", sum_cov);
  rep.add("total_cov_form", rep.c1 * sum_a + rep.c2 * sum_cov);
  rep.total = rep.c1 * sum_a + rep.c2 * sum_b;
  return rep;
}

}  // namespace vgchaos
