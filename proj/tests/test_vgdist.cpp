#include <doctest.h>

#include <cmath>

#include "vgchaos/empirical.hpp"
#include "vgchaos/errors.hpp"
#include "vgchaos/quadrature.hpp"
#include "vgchaos/stats.hpp"
#include "vgchaos/vgdist.hpp"

using namespace vgchaos;

TEST_CASE("density against high-precision reference values") {
  struct Ref {
    double r, th, s, mu, x, p;
  };
  // 30-digit evaluations of the Bessel-K closed form.
  const Ref refs[] = {
      {1, 0, 1, 0, 0.7, 0.21025000143170935},
      {2, 0, 1, 0, 1.3, 0.1362658965170063},
      {4, 0.5, 1.2, -1, 0.4, 0.17042878770563505},
      {3.3, -0.7, 0.8, 0.2, -2.0, 0.17473162255397205},
      {6, 1, 1, 0, 5, 0.10335533150600773},
  };
  for (const auto& r : refs) {
    CAPTURE(r.r);
    CHECK(vg_density(VGParams(r.r, r.th, r.s, r.mu), r.x) == doctest::Approx(r.p).epsilon(1e-11));
  }
}

TEST_CASE("laplace reduction") {
  CHECK(vg_density(VGParams(2, 0, 1), 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  for (double b : {0.5, 1.0, 2.0})
    for (int i = 0; i < 100; ++i) {
      const double x = -8.0 * b + 16.0 * b * (i + 0.5) / 100.0;
      const double lap = std::exp(-std::abs(x) / b) / (2.0 * b);
      REQUIRE(std::abs(vg_density(special::laplace(b), x) - lap) <= 1e-8);
    }
}

TEST_CASE("density integrates to one") {
  for (double r : {0.6, 1.0, 2.0, 5.5})
    for (double th : {-0.8, 0.0, 1.1}) {
      const VGParams p(r, th, 0.9, 0.3);
      CAPTURE(r);
      CAPTURE(th);
      CHECK(vg_expectation(p, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("pole at the location for r <= 1") {
  CHECK_THROWS_AS(vg_density(VGParams(1.0, 0, 1), 0.0), PoleAtLocation);
  CHECK(std::isfinite(vg_density(VGParams(1.5, 0, 1), 0.0)));
}

TEST_CASE("cumulants of the centered law") {
  const auto k = vg_cumulants(VGParams(2, 0, 1));
  CHECK(k(1) == 0.0);
  CHECK(k(2) == doctest::Approx(2.0));
  CHECK(k(3) == 0.0);
  CHECK(k(4) == doctest::Approx(12.0));
  CHECK(k(6) == doctest::Approx(240.0));
  const auto k1 = vg_cumulants(VGParams(1, 1, 1));
  CHECK(k1(2) == doctest::Approx(3.0));
  CHECK(k1(3) == doctest::Approx(14.0));
  CHECK(k1(4) == doctest::Approx(102.0));
  CHECK_THROWS_AS(vg_cumulants(VGParams(1, 1, 1, 0.5)), UnsupportedError);
}

TEST_CASE("moments and cumulants round trip") {
  const auto k = vg_cumulants(VGParams(3.3, -0.4, 1.7));
  const auto back = CumulantSet::from_moments(k.moments());
  for (int j = 1; j <= 6; ++j) CHECK(back(j) == doctest::Approx(k(j)).epsilon(1e-12));
  const double b = 1.3;
  const auto m = vg_moments(special::laplace(b));
  CHECK(m[1] == doctest::Approx(2 * b * b));
  CHECK(m[3] == doctest::Approx(24 * std::pow(b, 4)));
  CHECK(m[5] == doctest::Approx(720 * std::pow(b, 6)));
  CHECK(m[0] == 0.0);
  CHECK(m[2] == 0.0);
  CHECK(m[4] == 0.0);
  const double lam = 0.7, rp = 1.5;
  CHECK(vg_moments(special::sym_gamma(lam, rp))[3] ==
        doctest::Approx(12 * rp * (rp + 1) / std::pow(lam, 4)));
}

TEST_CASE("moments agree with quadrature of the density") {
  const VGParams p(2.5, 0.6, 1.1);
  const auto m = vg_moments(p);
  const VGParams c = p.centered();
  for (int j = 2; j <= 6; ++j) {
    const double q = vg_expectation(c, [j](double x) { return std::pow(x, j); });
    CHECK(q == doctest::Approx(m[j - 1]).epsilon(1e-8));
  }
}

TEST_CASE("cdf and quantile") {
  const auto lap = special::laplace(1.0);
  CHECK(vg_cdf(lap, 0.0) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(vg_cdf(lap, 1.0) == doctest::Approx(1.0 - 0.5 * std::exp(-1.0)).epsilon(1e-9));
  const VGParams p(1.7, -0.3, 0.8, 0.4);
  const double x = vg_quantile(p, 0.9);
  CHECK(std::abs(vg_cdf(p, x) - 0.9) < 1e-8);
  CHECK(vg_cdf(VGParams(3, 0, 2, 1.5), 1.5) == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("symmetrized gamma convolution oracle") {
  for (double r : {1.0, 2.0, 3.5})
    for (double x : {0.1, 1.0, 4.0, 12.0})
      CHECK(symgamma_density(1.3, r, x) ==
            doctest::Approx(vg_density(special::sym_gamma(1.3, r), x)).epsilon(1e-8));
  // The reflected form coincides only at r = 1.
  CHECK(reflected_gamma_density(1.0, 1.0, 2.0) == doctest::Approx(symgamma_density(1.0, 1.0, 2.0)));
  CHECK(std::abs(reflected_gamma_density(1.0, 2.0, 2.0) - symgamma_density(1.0, 2.0, 2.0)) > 0.01);
}

TEST_CASE("special cases map to the right parameters") {
  const auto s = special::sym_gamma(2.0, 1.5);
  CHECK(s.r == 3.0);
  CHECK(s.theta == 0.0);
  CHECK(s.sigma == 0.5);
  const auto g = special::gauss_limit_sequence(2.0, 50.0);
  CHECK(vg_cumulants(g)(4) == doctest::Approx(6.0 * 4.0 / 50.0));
  CHECK(vg_cumulants(g)(2) == doctest::Approx(2.0));
  const double args[] = {1.0};
  CHECK(special_case("laplace", args).r == 2.0);
}

TEST_CASE("sampler moments") {
  const std::size_t n = 1'000'000;
  const auto x = vg_sample(VGParams(1, 1, 1), n, 5);
  const auto m = batch_mean(x);
  CHECK(std::abs(m.mean - 1.0) < 3 * m.std_error);
  const auto ks = k_statistics(x);
  const auto exact = vg_cumulants(VGParams(1, 1, 1));
  for (int j = 2; j <= 4; ++j) {
    CAPTURE(j);
    CHECK(std::abs(ks.kappa(j) - exact(j)) < 3 * ks.std_error[j - 1]);
  }
  const auto sym = vg_sample(VGParams(2, 0, 1), n, 6);
  const auto kss = k_statistics(sym);
  CHECK(std::abs(kss.kappa(3)) < 3 * kss.std_error[2]);
}
