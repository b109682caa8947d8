#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vgchaos/report.hpp"
#include "vgchaos/stats.hpp"
#include "vgchaos/vgdist.hpp"

namespace vgchaos {

// Symmetric d x d matrix A_f of a second-chaos kernel f; F = I_2(f) = z'Az - Tr A.
class Kernel2 {
 public:
  // Symmetrizes the input; rejects asymmetry above 1e-12.
  explicit Kernel2(const Eigen::MatrixXd& a);

  static Kernel2 zero(int d);
  static Kernel2 diagonal(std::span<const double> diag);

  int dim() const { return static_cast<int>(a_.rows()); }
  const Eigen::MatrixXd& matrix() const { return a_; }
  double operator()(int i, int j) const { return a_(i, j); }

  double trace_power(int p) const;
  double hs_norm2() const { return a_.squaredNorm(); }

  Kernel2 scaled(double c) const;
  Kernel2 plus(const Kernel2& other) const;

 private:
  Eigen::MatrixXd a_;
};

struct SpectralKernel {
  std::vector<double> eigenvalues;

  double power_sum(int p) const;
  // Diagonal embedding.
  Kernel2 embed() const;
  // Eigenvalues of a kernel (symmetric eigensolver).
  static SpectralKernel of(const Kernel2& a);
};

// kappa_p = 2^{p-1} (p-1)! Tr(A^p), p in 2..6.
double cumulant2(const Kernel2& a, int p);
CumulantSet cumulants2(const Kernel2& a);

// j = 1: F itself; j >= 2: 2^{j-1} z'A^j z.
double gamma_path(const Kernel2& a, std::span<const double> z, int j);

// Draws of I_2(f) via the spectral chi-square representation.
std::vector<double> sample_chaos2(const Kernel2& a, std::size_t n, std::uint64_t seed);

// Pathwise F, Gamma_2, Gamma_3 at common Gaussian draws z.
struct GammaPaths {
  std::vector<double> f, gamma2, gamma3;
  std::vector<double> dnorm2;  // ||DF||^2 = 4 ||Az||^2
};
GammaPaths simulate_gamma_paths(const Kernel2& a, std::size_t n, std::uint64_t seed);

// sigma^2 (F + r theta) + 2 theta Gamma_2 - Gamma_3
double stein_integrand(const VGParams& target, double f, double gamma2, double gamma3);

// Full cumulant polynomial for the second chaos against VG_c(r, theta, sigma).
double interior_cumulant_form(const CumulantSet& k, const VGParams& target);
// The same quantity assembled from matrix contractions.
double interior_contraction_form(const Kernel2& a, const VGParams& target);

BoundReport vg_bound2(const Kernel2& a, const VGParams& target);
BoundReport result1_l1_bound(const Kernel2& a, const VGParams& target, std::size_t n_mc,
                             std::uint64_t seed);

struct Diag2 {
  double norm_a;         // ||A^2||
  double norm_b;         // ||A^2 - A/(2 lambda)||, lambda = 1/(2 theta)
  double norm_c;         // ||4A^3 - A/lambda^2||, lambda = 1/sigma
  double trace3;         // Tr A^3
  double norm_d;         // ||4A^3 - 4 theta A^2 - sigma^2 A||
  double trace3_target;  // (3/4) r theta sigma^2 + r theta^3
};
Diag2 contraction_diag2(const Kernel2& a, const VGParams& target);

struct EigenDiag {
  double mismatch;                 // sum (mu/lambda^2 - 4 mu^3)^2
  double cubic_sum;                // sum mu^3
  std::vector<int> orders;         // q = 2..qmax
  std::vector<double> power_sums;  // sum mu^{2q}
  std::vector<double> targets;     // (r/lambda^2)(1/(4 lambda^2))^{q-1}
  std::vector<double> gaps;
};
EigenDiag eigen_diag(const SpectralKernel& s, double lambda, double r, int qmax);
EigenDiag eigen_diag(const Kernel2& a, double lambda, double r, int qmax);

// m eigenvalues +1/(2 lambda) and m eigenvalues -1/(2 lambda): exactly Gamma_s(lambda, m/2).
SpectralKernel exact_symgamma_kernel(int m, double lambda);

struct SixMomentReport {
  std::vector<int> orders;
  std::vector<double> kernel_moments;
  std::vector<double> target_moments;
  std::vector<double> gaps;
};
SixMomentReport six_moment_check(const Kernel2& a, const VGParams& target);

BoundReport gauss_bound2(const Kernel2& a, double variance);

// 2 z'ABz
double cross_gamma_path(const Kernel2& a, const Kernel2& b, std::span<const double> z);
// Cov(I_2(A)^2, I_2(B)^2) = 32 Tr(A^2B^2) + 16 Tr((AB)^2) + 8 Tr(AB)^2
double cov_squares(const Kernel2& a, const Kernel2& b);

void write_kernel_csv(std::ostream& os, const Kernel2& a);
Kernel2 read_kernel_csv(std::istream& is);

}  // namespace vgchaos
