#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace vgchaos {

// VG(r, theta, sigma, mu): Y = mu + theta V + sigma sqrt(V) Z with V ~ Gamma(r/2, scale 2).
struct VGParams {
  double r = 1.0;
  double theta = 0.0;
  double sigma = 1.0;
  double mu = 0.0;
  std::string origin = "custom";

  VGParams() = default;
  VGParams(double r, double theta, double sigma, double mu = 0.0, std::string origin = "custom");

  double mean() const { return mu + r * theta; }
  double variance() const { return r * (sigma * sigma + 2.0 * theta * theta); }
  double nu() const { return 0.5 * (r - 1.0); }
  // The mean-zero member of the family: mu = -r theta.
  VGParams centered() const;
  bool symmetric() const { return theta == 0.0; }
};

// kappa[0..5] holds the cumulants of order 1..6.
struct CumulantSet {
  std::array<double, 6> kappa{};

  double operator()(int order) const { return kappa.at(order - 1); }
  double& operator()(int order) { return kappa.at(order - 1); }

  // Raw moments m_1..m_6 to cumulants and back.
  static CumulantSet from_moments(const std::array<double, 6>& m);
  std::array<double, 6> moments() const;
};

double vg_density(const VGParams& p, double x);
double vg_log_density(const VGParams& p, double x);

// Cumulants and moments of the mean-zero law, for parameters given with mu = 0.
// Throws UnsupportedError when mu != 0.
CumulantSet vg_cumulants(const VGParams& p);
std::array<double, 6> vg_moments(const VGParams& p);

std::vector<double> vg_sample(const VGParams& p, std::size_t n, std::uint64_t seed);

// E[f(Y)] by adaptive quadrature, split at the location.
double vg_expectation(const VGParams& p, const std::function<double(double)>& f,
                      double rel_tol = 1e-12);

// Piecewise cubic Hermite CDF table built from cellwise quadrature of the density.
// Cells touching the location are mapped by x = mu +/- a t^m to remove the cusp.
class CdfTable {
 public:
  explicit CdfTable(const VGParams& p);

  double cdf(double x) const;
  double quantile(double u) const;
  // Quantiles of an increasing sequence of levels in one sweep.
  std::vector<double> quantiles_sorted(std::span<const double> levels) const;

  const VGParams& params() const { return p_; }
  double lower() const { return cells_.front().x0; }
  double upper() const { return cells_.back().x1; }

  // Raw integral of the density over the table range plus tail estimates.
  double raw_mass() const { return raw_mass_; }
  std::size_t cells() const { return cells_.size(); }

 private:
  // Cubic Hermite cell in variable u: plain cells have u = x, mapped cells
  // have x = mu + a sgn(u)|u|^m.
  struct Cell {
    double x0, x1, u0, u1, f0, f1, d0, d1;
    bool mapped;
  };
  double to_u(const Cell& c, double x) const;
  double to_x(const Cell& c, double u) const;
  double eval(const Cell& c, double u) const;
  double invert(const Cell& c, double target) const;
  std::size_t find_by_x(double x) const;

  VGParams p_;
  std::vector<Cell> cells_;
  double a_ = 0.0;
  double m_ = 1.0;
  double rate_left_ = 1.0;
  double rate_right_ = 1.0;
  double raw_mass_ = 1.0;
};

std::shared_ptr<const CdfTable> vg_cdf_table(const VGParams& p);
double vg_cdf(const VGParams& p, double x);
double vg_quantile(const VGParams& p, double u);

// Density of X1 - X2 for iid Gamma(rate lambda, shape r), by convolution quadrature.
double symgamma_density(double lambda, double r, double x);

// lambda^r / (2 Gamma(r)) |x|^{r-1} exp(-lambda |x|): the reflected Gamma law.
// Coincides with symgamma_density only for r = 1.
double reflected_gamma_density(double lambda, double r, double x);

namespace special {
VGParams laplace(double b);
VGParams sym_gamma(double lambda, double r);
VGParams product_normals(double rho, double sigma_x, double sigma_y);
VGParams gamma_difference(double r, double lambda1, double lambda2, double rho);
VGParams gauss_limit_sequence(double variance, double r);
VGParams gamma_limit_sequence(double lambda, double r, double sigma);
}  // namespace special

// Dispatch by name, e.g. special_case("laplace", {1.0}).
VGParams special_case(std::string_view kind, std::span<const double> args);

}  // namespace vgchaos
