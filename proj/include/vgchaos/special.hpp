#pragma once

namespace vgchaos {

// Modified Bessel function of the second kind K_nu(x), nu >= 0, x > 0.
// Throws std::domain_error for bad arguments and std::range_error on overflow.
double bessel_k(double nu, double x);

// log K_nu(x); finite wherever bessel_k would overflow or underflow.
double log_bessel_k(double nu, double x);

// Same quantity from the integral representation only (the quadrature oracle).
double log_bessel_k_integral(double nu, double x);

// Same quantity from the large-x asymptotic series only.
// Throws std::domain_error if the series has not converged at x.
double log_bessel_k_asymptotic(double nu, double x);

// Smallest x at which the asymptotic series is used for this order.
double bessel_k_crossover(double nu);

// K_nu for one fixed order, with the crossover computed once.
class BesselKOrder {
 public:
  explicit BesselKOrder(double nu);
  double log_k(double x) const;
  double nu() const { return nu_; }
  double crossover() const { return crossover_; }

 private:
  double nu_;
  double crossover_;
};

}  // namespace vgchaos
