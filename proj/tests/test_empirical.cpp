#include <doctest.h>

#include <cmath>
#include <sstream>

#include "vgchaos/chaos2.hpp"
#include "vgchaos/empirical.hpp"
#include "vgchaos/rng.hpp"
#include "vgchaos/stats.hpp"
#include "vgchaos/tensorq.hpp"

using namespace vgchaos;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::vector<double> v(n);
  for_each_chunk(n, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) v[i] = rng.normal();
  });
  return v;
}

}  // namespace

TEST_CASE("wasserstein metric properties") {
  const auto a = normals(1000, 1), b = normals(1000, 2), c = normals(1000, 3);
  CHECK(wasserstein_1d(a, a) == 0.0);
  CHECK(wasserstein_1d(a, b) == wasserstein_1d(b, a));
  CHECK(wasserstein_1d(a, c) <= wasserstein_1d(a, b) + wasserstein_1d(b, c) + 1e-15);
  auto s = a;
  for (auto& x : s) x += 0.37;
  CHECK(wasserstein_1d(a, s) == doctest::Approx(0.37).epsilon(1e-12));
  CHECK_THROWS_AS(wasserstein_1d(std::vector<double>{}, a), std::invalid_argument);
  // Unequal sizes are trimmed.
  const std::vector<double> small(a.begin(), a.begin() + 10);
  CHECK(wasserstein_1d(small, a) == 0.0);
}

TEST_CASE("wasserstein to the law") {
  const auto lap = special::laplace(1.0);
  const auto x = vg_sample(lap, 1'000'000, 4);
  const auto y = vg_sample(lap, 1'000'000, 5);
  CHECK(wasserstein_1d(x, y) <= 0.005);
  CHECK(wasserstein_to_vg(x, lap) <= 0.01);
  const std::vector<double> zeros(20000, 0.0);
  CHECK(wasserstein_to_vg(zeros, lap) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("k-statistics on a small sample") {
  const std::vector<double> x{1.0, 2.0, 4.0, 7.0, 11.0, 3.0, 5.0, 8.0};
  const auto ks = k_statistics(x, 0);
  double n = x.size(), m = 0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0, m3 = 0, m4 = 0;
  for (double v : x) {
    const double d = v - m;
    m2 += d * d, m3 += d * d * d, m4 += d * d * d * d;
  }
  m2 /= n, m3 /= n, m4 /= n;
  CHECK(ks.kappa(1) == doctest::Approx(m));
  CHECK(ks.kappa(2) == doctest::Approx(n * m2 / (n - 1)));
  CHECK(ks.kappa(3) == doctest::Approx(n * n * m3 / ((n - 1) * (n - 2))));
  const double k4 = n * n * ((n + 1) * m4 - 3 * (n - 1) * m2 * m2) / ((n - 1) * (n - 2) * (n - 3));
  CHECK(ks.kappa(4) == doctest::Approx(k4));
  CHECK_THROWS(k_statistics(std::vector<double>(6, 1.0)));
}

TEST_CASE("k-statistics are unbiased for a discrete law") {
  // Average of k_j over all 3^7 samples of size 7 from {-1, 0, 2} with equal weights.
  const double pts[] = {-1.0, 0.0, 2.0};
  std::array<double, 6> mean{};
  int count = 0;
  std::vector<double> s(7);
  for (int code = 0; code < 2187; ++code) {
    int c = code;
    for (int i = 0; i < 7; ++i, c /= 3) s[i] = pts[c % 3];
    const auto k = k_statistics(s, 0);
    for (int j = 0; j < 6; ++j) mean[j] += k.kappa.kappa[j];
    ++count;
  }
  std::array<double, 6> raw{};
  for (int j = 0; j < 6; ++j) {
    for (double p : pts) raw[j] += std::pow(p, j + 1) / 3.0;
  }
  const auto kap = CumulantSet::from_moments(raw);
  for (int j = 0; j < 6; ++j) CHECK(mean[j] / count == doctest::Approx(kap.kappa[j]).epsilon(1e-9));
}

TEST_CASE("k-statistics of Monte Carlo samples") {
  const auto z = normals(1'000'000, 7);
  const auto kz = k_statistics(z);
  CHECK(std::abs(kz.kappa(4)) < 3 * kz.std_error[3]);
  const auto l = vg_sample(special::laplace(1.0), 1'000'000, 8);
  const auto kl = k_statistics(l);
  CHECK(std::abs(kl.kappa(4) - 12.0) < 3 * kl.std_error[3]);
}

TEST_CASE("sample set csv and determinism") {
  const SampleSet a(vg_sample(VGParams(2, 0, 1), 100, 9), 9, "laplace");
  const SampleSet b(vg_sample(VGParams(2, 0, 1), 100, 9), 9, "laplace");
  CHECK(a.values == b.values);
  std::stringstream ss;
  a.write_csv(ss);
  std::string line;
  std::getline(ss, line);
  CHECK(line.rfind("# seed=9", 0) == 0);
  std::getline(ss, line);
  CHECK(line == "value");
  CHECK_THROWS(SampleSet({1.0, NAN}, 0, ""));
}

TEST_CASE("homogeneous coefficient validation") {
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(3, 3);
  h(0, 1) = h(1, 0) = 0.5;
  CHECK_NOTHROW(HomogeneousCoeff::from_matrix(h));
  h(2, 2) = 1.0;
  CHECK_THROWS(HomogeneousCoeff::from_matrix(h));
  h(2, 2) = 0.0;
  h(0, 2) = 0.1;
  CHECK_THROWS(HomogeneousCoeff::from_matrix(h));
}

TEST_CASE("gaussian-base sums are second-chaos variables") {
  Philox4x32 rng(10, 0);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) h(i, j) = h(j, i) = 0.4 * rng.normal();
  const auto c = HomogeneousCoeff::from_matrix(h);
  const auto s = homogeneous_sum(c, BaseLaw::gaussian, 1'000'000, 11);
  const auto ks = k_statistics(s);
  const auto exact = cumulants2(c.kernel2());
  for (int j = 2; j <= 6; ++j) {
    CAPTURE(j);
    CHECK(std::abs(ks.kappa(j) - exact(j)) < 3 * ks.std_error[j - 1]);
  }
  CHECK(c.variance() == doctest::Approx(exact(2)));
  const auto zero = homogeneous_sum(HomogeneousCoeff::from_matrix(Eigen::MatrixXd::Zero(3, 3)),
                                    BaseLaw::rademacher, 100, 1);
  for (double v : zero.values) CHECK(v == 0.0);
}

TEST_CASE("gaussian-base sum and multiple integral agree in distribution") {
  // q = 3 coefficients, zero on repeated indices.
  const int n = 4;
  Tensor t(3, n);
  Philox4x32 rng(12, 0);
  std::vector<int> idx(3);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k) {
        const double v = 0.3 * rng.normal();
        const int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
        for (const auto& p : perm) t.at(p) = v;
      }
  const HomogeneousCoeff c(n, 3, t.data());
  const auto h = homogeneous_sum(c, BaseLaw::gaussian, 400000, 13);
  const auto m = sample_multiple_integrals(SymTensor(t), 400000, 14);
  const auto kh = k_statistics(h), km = k_statistics(m);
  for (int j = 2; j <= 4; ++j) {
    CAPTURE(j);
    const double se = std::hypot(kh.std_error[j - 1], km.std_error[j - 1]);
    CHECK(std::abs(kh.kappa(j) - km.kappa(j)) < 3 * se);
  }
  CHECK(c.variance() == doctest::Approx(6.0 * SymTensor(t).norm2()));
}

TEST_CASE("uniform base has unit variance") {
  const auto c = universality_family(10);
  const auto s = homogeneous_sum(c, BaseLaw::uniform, 200000, 15);
  const auto m = batch_mean_of(s.values, [](double x) { return x * x; });
  CHECK(std::abs(m.mean - c.variance()) < 3 * m.std_error);
  CHECK(parse_base_law("rademacher") == BaseLaw::rademacher);
  CHECK_THROWS(parse_base_law("cauchy"));
}

TEST_CASE("multivariate bound") {
  const double a[] = {1.0, 0.0}, b[] = {0.0, 1.0};
  const std::vector<Kernel2> ks{Kernel2::diagonal(a), Kernel2::diagonal(b)};
  const std::vector<VGParams> ts{VGParams(1, 0, 1), VGParams(1, 0, 1)};
  const auto r = multivariate_bound(ks, ts, 100000, 1);
  CHECK(std::abs(r.term("B(0,1)")) <= 3 * r.get("B(0,1)").std_error);
  CHECK(r.term("cov(0,1)") == 0.0);

  Eigen::MatrixXd m(3, 3);
  m << 0.5, 0.2, 0.0, 0.2, -0.3, 0.1, 0.0, 0.1, 0.4;
  const VGParams t(1.5, 0.2, 0.9);
  const auto single = multivariate_bound({Kernel2(m)}, {t}, 200000, 2);
  const auto ref = result1_l1_bound(Kernel2(m), t, 200000, 3);
  const double se = std::hypot(single.get("A(0)").std_error, ref.get("l1").std_error);
  CHECK(std::abs(single.term("A(0)") - ref.total) < 3 * se);

  CHECK_THROWS(multivariate_bound({Kernel2(m), Kernel2::diagonal(a)}, {t, t}, 1000, 1));
}
