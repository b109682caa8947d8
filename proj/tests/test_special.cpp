#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "vgchaos/quadrature.hpp"
#include "vgchaos/rng.hpp"
#include "vgchaos/special.hpp"
#include "vgchaos/stats.hpp"
#include "vgchaos/summation.hpp"

using namespace vgchaos;

TEST_CASE("bessel_k against high-precision reference values") {
  struct Ref {
    double nu, x, k;
  };
  // 30-digit evaluations, rounded to 17 significant digits.
  const Ref refs[] = {
      {0.0, 0.1, 2.4270690247020166},   {0.5, 1.0, 0.46106850444789456},
      {1.5, 2.5, 0.091092320415613985}, {3.0, 10.0, 2.7252700256598692e-5},
      {2.25, 40.0, 8.9341124269846954e-19}, {7.5, 0.3, 1409014685.6587042},
  };
  for (const auto& r : refs) {
    CAPTURE(r.nu);
    CAPTURE(r.x);
    CHECK(bessel_k(r.nu, r.x) == doctest::Approx(r.k).epsilon(1e-12));
  }
}

TEST_CASE("bessel_k half order closed form and integral representation") {
  CHECK(bessel_k(0.5, 1.0) == doctest::Approx(std::sqrt(std::numbers::pi / 2) * std::exp(-1.0)).epsilon(1e-13));
  for (double nu : {0.0, 0.5, 1.0, 2.5, 6.0})
    for (double x : {0.05, 0.7, 3.0, 10.0, 35.0}) {
      CAPTURE(nu);
      CAPTURE(x);
      CHECK(std::abs(log_bessel_k(nu, x) - log_bessel_k_integral(nu, x)) < 1e-10);
    }
  CHECK(bessel_k(0.0, 1.0) > bessel_k(0.0, 2.0));
}

TEST_CASE("bessel_k asymptotic branch agrees with quadrature past the crossover") {
  for (double nu : {0.0, 1.5, 4.0}) {
    const double x = 1.5 * bessel_k_crossover(nu);
    CHECK(std::abs(log_bessel_k_asymptotic(nu, x) - log_bessel_k_integral(nu, x)) < 1e-11);
  }
}

TEST_CASE("bessel_k argument errors") {
  CHECK_THROWS_AS(bessel_k(-1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(bessel_k(1.0, 0.0), std::domain_error);
}

TEST_CASE("gauss-kronrod integrates smooth and tail integrands") {
  const auto r = quad::integrate([](double x) { return std::exp(-x * x); }, -10.0, 10.0);
  CHECK(r.value == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-13));
  const auto t = quad::integrate_upper_tail([](double x) { return std::exp(-x); }, 0.0, 1.0);
  CHECK(t.value == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("gauss-hermite rule reproduces normal moments") {
  const auto rule = quad::gauss_hermite_normal(40);
  double m[4] = {0, 0, 0, 0};
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = rule.nodes[i], w = rule.weights[i];
    m[0] += w, m[1] += w * x * x, m[2] += w * std::pow(x, 4), m[3] += w * std::pow(x, 6);
  }
  CHECK(m[0] == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(m[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m[2] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(m[3] == doctest::Approx(15.0).epsilon(1e-12));
}

TEST_CASE("philox streams are deterministic and distinct") {
  Philox4x32 a(7, 0), b(7, 0), c(7, 1), d(8, 0);
  std::set<std::uint32_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u32();
    CHECK(x == b.next_u32());
    firsts.insert(x);
  }
  CHECK(firsts.size() > 95);
  Philox4x32 a2(7, 0);
  CHECK(a2.next_u64() != c.next_u64());
  Philox4x32 a3(7, 0);
  CHECK(a3.next_u64() != d.next_u64());
}

TEST_CASE("philox reference block") {
  // Known-answer value for Philox4x32-10 with zero counter and key.
  const auto out = Philox4x32::bijection({0, 0, 0, 0}, {0, 0});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);
}

TEST_CASE("normal, gamma and uniform draws have the right first moments") {
  const std::size_t n = 200000;
  std::vector<double> z(n), g(n), u(n);
  for_each_chunk(n, 11, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      z[i] = rng.normal();
      g[i] = rng.gamma(0.7);
      u[i] = rng.uniform();
    }
  });
  const auto mz = batch_mean(z);
  CHECK(std::abs(mz.mean) < 4 * mz.std_error);
  const auto mz2 = batch_mean_of(z, [](double x) { return x * x; });
  CHECK(std::abs(mz2.mean - 1.0) < 4 * mz2.std_error);
  const auto mg = batch_mean(g);
  CHECK(std::abs(mg.mean - 0.7) < 4 * mg.std_error);
  const auto mu = batch_mean(u);
  CHECK(std::abs(mu.mean - 0.5) < 4 * mu.std_error);
  for (double x : u) REQUIRE((x > 0.0 && x < 1.0));
}

TEST_CASE("chunked sampling does not depend on worker count") {
  auto run = [] {
    std::vector<double> v(100000);
    for_each_chunk(v.size(), 3, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) v[i] = rng.normal();
    });
    return v;
  };
  setenv("VGCHAOS_THREADS", "1", 1);
  const auto one = run();
  setenv("VGCHAOS_THREADS", "4", 1);
  const auto four = run();
  unsetenv("VGCHAOS_THREADS");
  CHECK(one == four);
}

TEST_CASE("loglog slope of a power law") {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 / (v * v));
  CHECK(loglog_slope(x, y) == doctest::Approx(-2.0).epsilon(1e-12));
}

TEST_CASE("compensated summation recovers small terms") {
  CompensatedSum s;
  s += 1e16;
  for (int i = 0; i < 1000; ++i) s += 1.0;
  s += -1e16;
  CHECK(s.value() == 1000.0);
}
