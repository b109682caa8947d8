#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "vgchaos/vgdist.hpp"

namespace vgchaos {

struct SteinConstants {
  double c0 = 0.0;
  double c1 = 0.0;
  double c2_1 = 0.0;
  double c2_2 = 0.0;
};

// Explicit constants for the symmetrized Gamma equation; r must be a positive integer.
SteinConstants stein_constants(double lambda, double r);

// A test function with its first two derivatives.
struct TestFunction {
  std::function<double(double)> f, df, d2f;
};
// sum_k c[k] x^k
TestFunction polynomial(std::vector<double> coeffs);
TestFunction monomial(int k);

// E[(1/l^2) Y f''(Y) + (2r/l^2) f'(Y) - Y f(Y)] under the symmetrized Gamma law.
double residual_symgamma(double lambda, double r, const TestFunction& f);
// E[s^2 (Y + r t) f'' + (s^2 r + 2t(Y + r t)) f' - Y f] under the mean-zero VG law.
// p is given with mu = 0 in the (r, theta, sigma) notation of the centered family.
double residual_vg(const VGParams& p, const TestFunction& f);
// E[f(Y)] - f(0) - b^2 E[f''(Y)] under Laplace(b).
double laplace_identity(double b, const TestFunction& f);
// E[f'(Z) - Z f(Z)] for standard normal Z, by Gauss-Hermite quadrature.
double normal_residual(const TestFunction& f, int nodes = 96);

struct SteinGrid {
  int nodes = 24;              // Chebyshev-Lobatto nodes per element minus one
  double first_width = 0.0;    // 0 picks half the smaller of 1 and the standard deviation
  double growth = 1.1;         // element width growth away from the singular point
  double max_width_factor = 6.0;
  double tail_mass = 1e-12;    // truncation: law mass beyond each end
};

struct SteinPoint {
  double x, f, df, d2f;
};

// Tabulated bounded solution of the VG Stein equation
//   s^2 (x + r t) f'' + (s^2 r + 2t(x + r t)) f' - x f = h(x) - E h(Y)
// for the mean-zero law, on [x0 - L, x0 + L] with x0 = -r t.
class SteinSolution {
 public:
  SteinPoint eval(double x) const;
  std::vector<SteinPoint> table() const;
  void write_csv(std::ostream& os) const;

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double singular_point() const { return x0_; }
  double expectation() const { return eh_; }
  // sup |ODE residual| at off-node points with |x - x0| <= 0.8 L
  double residual_sup() const { return residual_sup_; }
  // Jumps of f and f' across the singular point (the two halves are solved independently).
  double jump_f() const { return jump_f_; }
  double jump_df() const { return jump_df_; }

  // Sup norms over nodes and off-node samples.
  double sup_f() const;
  double sup_df() const;
  double sup_d2f() const;
  double sup_centered_h() const;  // sup |h - E h|
  double sup_dh() const;          // sup |h'| by central differences

 private:
  friend std::vector<SteinSolution> solve_stein_batch(const VGParams&,
                                                      const std::vector<std::function<double(double)>>&,
                                                      const SteinGrid&);
  struct Element {
    double a, b;
    std::vector<double> x, f, df, d2f;
  };
  std::vector<double> sample_points() const;
  double residual_at(double x) const;

  VGParams p_;
  std::function<double(double)> h_;
  std::vector<Element> elements_;
  std::vector<double> bary_;
  double x0_ = 0.0, lower_ = 0.0, upper_ = 0.0, eh_ = 0.0;
  double residual_sup_ = 0.0, jump_f_ = 0.0, jump_df_ = 0.0;
};

// p in the centered-family notation (mu = 0). Throws SolverError when the interior
// residual exceeds 1e-3.
SteinSolution solve_stein(const VGParams& p, std::function<double(double)> h,
                          const SteinGrid& grid = {});
// One factorization shared by all right-hand sides.
std::vector<SteinSolution> solve_stein_batch(const VGParams& p,
                                             const std::vector<std::function<double(double)>>& hs,
                                             const SteinGrid& grid = {});

struct SteinBoundCheck {
  SteinConstants constants;
  double sup_f = 0.0, sup_df = 0.0, sup_d2f = 0.0;
  double sup_centered_h = 0.0, sup_dh = 0.0;
  double bound_f = 0.0, bound_df = 0.0, bound_d2f = 0.0;
  bool holds() const { return sup_f <= bound_f && sup_df <= bound_df && sup_d2f <= bound_d2f; }
};
// Symmetrized Gamma case: p = VG(2r, 0, 1/lambda) with integer r.
SteinBoundCheck stein_bound_check(const SteinSolution& sol, double lambda, double r);

}  // namespace vgchaos
