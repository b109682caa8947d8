#include "vgchaos/special.hpp"

#include <cfloat>
#include <cmath>
#include <stdexcept>

#include "vgchaos/quadrature.hpp"

namespace vgchaos {

namespace {

constexpr double kLn2 = 0.69314718055994530942;
constexpr double kSeriesTol = 1e-17;

// log cosh(y) without overflow.
double log_cosh(double y) {
  y = std::abs(y);
  return y - kLn2 + std::log1p(std::exp(-2.0 * y));
}

// Sum of sqrt(pi/2x) e^{-x} sum_k a_k x^{-k}; returns false if the smallest
// term never drops below tolerance before the series starts to diverge.
bool asymptotic_sum(double nu, double x, double& sum) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0;
  sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (8.0 * k * x);
    if (next == 0.0) return true;
    if (std::abs(next) > std::abs(term) && k > 1) return false;
    sum += next;
    term = next;
    if (std::abs(term) < kSeriesTol * std::abs(sum)) return true;
  }
  return false;
}

}  // namespace

double log_bessel_k_asymptotic(double nu, double x) {
  double sum = 0.0;
  if (!asymptotic_sum(nu, x, sum) || !(sum > 0.0))
    throw std::domain_error("log_bessel_k_asymptotic: series not converged at this x");
  return 0.5 * std::log(M_PI / (2.0 * x)) - x + std::log(sum);
}

double bessel_k_crossover(double nu) {
  // Continuity matching: the series is exact to working precision once its
  // smallest term falls below the tolerance, so both branches agree there.
  double x = 16.0;
  double sum = 0.0;
  while (!asymptotic_sum(nu, x, sum)) x *= 1.25;
  return x;
}

double log_bessel_k_integral(double nu, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  if (!(nu >= 0.0)) throw std::domain_error("bessel_k: nu must be nonnegative");
  auto phi = [nu, x](double t) { return -x * std::cosh(t) + log_cosh(nu * t); };
  // Peak location: x sinh t = nu tanh(nu t).
  double tpk = 0.0;
  if (nu * nu > x) {
    double lo = 0.0, hi = std::asinh(nu / x) + 1.0;
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double g = -x * std::sinh(mid) + nu * std::tanh(nu * mid);
      if (g > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    tpk = 0.5 * (lo + hi);
  }
  const double peak = phi(tpk);
  // Cut-off where the integrand has dropped by e^{-60}.
  double step = 1.0 / std::sqrt(std::max(x, 1e-3)) + 0.5;
  double tend = tpk + step;
  while (phi(tend) - peak > -60.0) {
    step *= 1.5;
    tend = tpk + step;
  }
  auto g = [&](double t) { return std::exp(phi(t) - peak); };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-14;
  double total = 0.0;
  if (tpk > 0.0) total += quad::integrate(g, 0.0, tpk, opt).value;
  total += quad::integrate(g, tpk, tend, opt).value;
  return peak + std::log(total);
}

BesselKOrder::BesselKOrder(double nu) : nu_(nu), crossover_(0.0) {
  if (!(nu >= 0.0)) throw std::domain_error("bessel_k: nu must be nonnegative");
  crossover_ = bessel_k_crossover(nu);
}

double BesselKOrder::log_k(double x) const {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  if (x >= crossover_) return log_bessel_k_asymptotic(nu_, x);
  return log_bessel_k_integral(nu_, x);
}

double log_bessel_k(double nu, double x) {
  if (!(x > 0.0)) throw std::domain_error("bessel_k: x must be positive");
  return BesselKOrder(nu).log_k(x);
}

double bessel_k(double nu, double x) {
  const double lk = log_bessel_k(nu, x);
  if (lk > std::log(DBL_MAX)) throw std::range_error("bessel_k: result overflows double");
  return std::exp(lk);
}

}  // namespace vgchaos
