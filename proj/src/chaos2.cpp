#include "vgchaos/chaos2.hpp"

#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vgchaos/errors.hpp"
#include "vgchaos/rng.hpp"
#include "vgchaos/summation.hpp"

namespace vgchaos {

namespace {

constexpr double kAsymmetryTol = 1e-12;

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

// Tr(X Y) for symmetric X, Y.
double trace_product(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  return x.cwiseProduct(y).sum();
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, int p) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  for (int i = 0; i < p; ++i) out = out * a;
  return out;
}

void check_same_dim(const Kernel2& a, const Kernel2& b, const char* who) {
  if (a.dim() != b.dim())
    throw std::invalid_argument(std::string(who) + ": kernel dimensions differ (" +
                                std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
}

void check_centered(const VGParams& t, const char* who) {
  if (t.mu != 0.0)
    throw UnsupportedError(std::string(who) + ": target must have mu = 0");
}

}  // namespace

Kernel2::Kernel2(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols() || a.rows() < 1)
    throw std::invalid_argument("Kernel2: matrix must be square and nonempty");
  if (!a.allFinite()) throw std::invalid_argument("Kernel2: non-finite entry");
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTol)
    throw std::invalid_argument("Kernel2: asymmetry " + std::to_string(asym) +
                                " exceeds 1e-12");
  a_ = 0.5 * (a + a.transpose());
}

Kernel2 Kernel2::zero(int d) { return Kernel2(Eigen::MatrixXd::Zero(d, d)); }

Kernel2 Kernel2::diagonal(std::span<const double> diag) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(diag.size()),
                                            static_cast<Eigen::Index>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) a(i, i) = diag[i];
  return Kernel2(a);
}

double Kernel2::trace_power(int p) const {
  if (p < 0) throw std::invalid_argument("trace_power: negative power");
  if (p == 0) return static_cast<double>(dim());
  if (p == 1) return a_.trace();
  const int h = p / 2;
  const Eigen::MatrixXd lo = matrix_power(a_, h);
  if (p % 2 == 0) return trace_product(lo, lo);
  return trace_product(lo, lo * a_);
}

Kernel2 Kernel2::scaled(double c) const { return Kernel2(c * a_); }

Kernel2 Kernel2::plus(const Kernel2& other) const {
  check_same_dim(*this, other, "Kernel2::plus");
  return Kernel2(a_ + other.a_);
}

double SpectralKernel::power_sum(int p) const {
  CompensatedSum s;
  for (double mu : eigenvalues) s.add(std::pow(mu, p));
  return s.value();
}

Kernel2 SpectralKernel::embed() const { return Kernel2::diagonal(eigenvalues); }

SpectralKernel SpectralKernel::of(const Kernel2& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.matrix(), Eigen::EigenvaluesOnly);
  SpectralKernel s;
  s.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + a.dim());
  return s;
}

double cumulant2(const Kernel2& a, int p) {
  if (p < 2 || p > 6) throw std::invalid_argument("cumulant2: order must be in 2..6");
  return std::ldexp(1.0, p - 1) * factorial(p - 1) * a.trace_power(p);
}

CumulantSet cumulants2(const Kernel2& a) {
  CumulantSet k;
  k(1) = 0.0;
  for (int p = 2; p <= 6; ++p) k(p) = cumulant2(a, p);
  return k;
}

double gamma_path(const Kernel2& a, std::span<const double> z, int j) {
  if (static_cast<int>(z.size()) != a.dim())
    throw std::invalid_argument("gamma_path: z has length " + std::to_string(z.size()) +
                                ", kernel dimension is " + std::to_string(a.dim()));
  if (j < 1) throw std::invalid_argument("gamma_path: j must be >= 1");
  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), a.dim());
  const Eigen::MatrixXd& m = a.matrix();
  if (j == 1) return zv.dot(m * zv) - m.trace();
  // z'A^j z = |A^{j/2} z|^2 or (A^{(j-1)/2} z)' A (A^{(j-1)/2} z)
  Eigen::VectorXd w = zv;
  for (int i = 0; i < j / 2; ++i) w = m * w;
  const double quad = (j % 2 == 0) ? w.squaredNorm() : w.dot(m * w);
  return std::ldexp(quad, j - 1);
}

std::vector<double> sample_chaos2(const Kernel2& a, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("sample_chaos2: n must be >= 1");
  const SpectralKernel s = SpectralKernel::of(a);
  std::vector<double> out(n);
  for_each_chunk(n, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double x = 0.0;
      for (double mu : s.eigenvalues) {
        const double z = rng.normal();
        x += mu * (z * z - 1.0);
      }
      out[i] = x;
    }
  });
  return out;
}

GammaPaths simulate_gamma_paths(const Kernel2& a, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("simulate_gamma_paths: n must be >= 1");
  GammaPaths g;
  g.f.resize(n);
  g.gamma2.resize(n);
  g.gamma3.resize(n);
  g.dnorm2.resize(n);
  const Eigen::MatrixXd& m = a.matrix();
  const double tr = m.trace();
  const Eigen::Index d = m.rows();
  for_each_chunk(n, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    const Eigen::Index cols = static_cast<Eigen::Index>(e - b);
    Eigen::MatrixXd z(d, cols);
    for (Eigen::Index c = 0; c < cols; ++c)
      for (Eigen::Index i = 0; i < d; ++i) z(i, c) = rng.normal();
    const Eigen::MatrixXd w = m * z;
    const Eigen::MatrixXd v = m * w;
    for (Eigen::Index c = 0; c < cols; ++c) {
      const std::size_t k = b + static_cast<std::size_t>(c);
      const double ww = w.col(c).squaredNorm();
      g.f[k] = z.col(c).dot(w.col(c)) - tr;
      g.gamma2[k] = 2.0 * ww;
      g.gamma3[k] = 4.0 * w.col(c).dot(v.col(c));
      g.dnorm2[k] = 4.0 * ww;
    }
  });
  return g;
}

double stein_integrand(const VGParams& t, double f, double gamma2, double gamma3) {
  const double s2 = t.sigma * t.sigma;
  return s2 * (f + t.r * t.theta) + 2.0 * t.theta * gamma2 - gamma3;
}

double interior_cumulant_form(const CumulantSet& k, const VGParams& t) {
  const double r = t.r, th = t.theta, s2 = t.sigma * t.sigma;
  const double k2 = k(2), k3 = k(3), k4 = k(4), k5 = k(5), k6 = k(6);
  CompensatedSum s;
  s += k6 / 120.0;
  s += -th * k5 / 6.0;
  s += (2.0 * th * th - s2) * k4 / 3.0;
  s += (2.0 - r) * th * s2 * k3;
  s += k3 * k3 / 4.0;
  s += -2.0 * th * k2 * k3;
  s += (s2 * s2 + 4.0 * r * th * th * s2) * k2;
  s += 4.0 * th * th * k2 * k2;
  s += r * r * th * th * s2 * s2;
  return s.value();
}

double interior_contraction_form(const Kernel2& a, const VGParams& t) {
  const Eigen::MatrixXd& m = a.matrix();
  const Eigen::MatrixXd m2 = m * m;
  const Eigen::MatrixXd m3 = m2 * m;
  const double s2 = t.sigma * t.sigma;
  const Eigen::MatrixXd mid = 4.0 * m3 - 4.0 * t.theta * m2 - s2 * m;
  const double shift = 4.0 * m3.trace() - 4.0 * t.theta * m2.trace() - t.r * t.theta * s2;
  return 2.0 * mid.squaredNorm() + shift * shift;
}

BoundReport vg_bound2(const Kernel2& a, const VGParams& t) {
  check_centered(t, "vg_bound2");
  const CumulantSet k = cumulants2(a);
  const double interior = interior_cumulant_form(k, t);
  BoundReport rep;
  rep.kind = "vg_bound2";
  rep.add("interior", interior);
  if (t.symmetric()) {
    const double rp = 0.5 * t.r;
    const double ib = k(6) / 120.0 - k(4) * k(2) / (6.0 * rp) + k(2) * k(2) * k(2) / (4.0 * rp * rp) +
                      k(3) * k(3) / 6.0;
    rep.add("interior_b", ib);
  }
  const double term1 = std::sqrt(std::max(interior, 0.0));
  const double term2 = std::abs(t.variance() - k(2));
  rep.add("term1", term1);
  rep.add("term2", term2);
  rep.interior_negative = interior < -1e-9;
  rep.total = rep.c1 * term1 + rep.c2 * term2;
  return rep;
}

BoundReport result1_l1_bound(const Kernel2& a, const VGParams& t, std::size_t n_mc,
                             std::uint64_t seed) {
  check_centered(t, "result1_l1_bound");
  const GammaPaths g = simulate_gamma_paths(a, n_mc, seed);
  std::vector<double> v(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i)
    v[i] = std::abs(stein_integrand(t, g.f[i], g.gamma2[i], g.gamma3[i]));
  const Estimate l1 = batch_mean(v);
  const double term2 = std::abs(t.variance() - cumulant2(a, 2));
  BoundReport rep;
  rep.kind = "result1_l1";
  rep.add("l1", l1.mean, l1.std_error);
  rep.add("term2", term2);
  rep.total = rep.c1 * l1.mean + rep.c2 * term2;
  return rep;
}

Diag2 contraction_diag2(const Kernel2& a, const VGParams& t) {
  const Eigen::MatrixXd& m = a.matrix();
  const Eigen::MatrixXd m2 = m * m;
  const Eigen::MatrixXd m3 = m2 * m;
  const double s2 = t.sigma * t.sigma;
  Diag2 out;
  out.norm_a = m2.norm();
  out.norm_b = t.theta > 0.0 ? (m2 - t.theta * m).norm() : std::numeric_limits<double>::quiet_NaN();
  out.norm_c = (4.0 * m3 - s2 * m).norm();
  out.trace3 = m3.trace();
  out.norm_d = (4.0 * m3 - 4.0 * t.theta * m2 - s2 * m).norm();
  out.trace3_target = 0.75 * t.r * t.theta * s2 + t.r * t.theta * t.theta * t.theta;
  return out;
}

EigenDiag eigen_diag(const SpectralKernel& s, double lambda, double r, int qmax) {
  if (qmax < 2) throw std::invalid_argument("eigen_diag: qmax must be >= 2");
  if (!(lambda > 0.0)) throw std::invalid_argument("eigen_diag: lambda must be > 0");
  const double il2 = 1.0 / (lambda * lambda);
  EigenDiag out;
  CompensatedSum mis;
  for (double mu : s.eigenvalues) {
    const double e = mu * il2 - 4.0 * mu * mu * mu;
    mis += e * e;
  }
  out.mismatch = mis.value();
  out.cubic_sum = s.power_sum(3);
  for (int q = 2; q <= qmax; ++q) {
    const double ps = s.power_sum(2 * q);
    const double target = r * il2 * std::pow(0.25 * il2, q - 1);
    out.orders.push_back(q);
    out.power_sums.push_back(ps);
    out.targets.push_back(target);
    out.gaps.push_back(std::abs(ps - target));
  }
  return out;
}

EigenDiag eigen_diag(const Kernel2& a, double lambda, double r, int qmax) {
  return eigen_diag(SpectralKernel::of(a), lambda, r, qmax);
}

SpectralKernel exact_symgamma_kernel(int m, double lambda) {
  if (m < 1) throw std::invalid_argument("exact_symgamma_kernel: m must be >= 1");
  if (!(lambda > 0.0)) throw std::invalid_argument("exact_symgamma_kernel: lambda must be > 0");
  SpectralKernel s;
  const double e = 0.5 / lambda;
  s.eigenvalues.assign(static_cast<std::size_t>(m), e);
  s.eigenvalues.insert(s.eigenvalues.end(), static_cast<std::size_t>(m), -e);
  return s;
}

SixMomentReport six_moment_check(const Kernel2& a, const VGParams& t) {
  check_centered(t, "six_moment_check");
  const auto km = cumulants2(a).moments();
  const auto tm = vg_moments(t);
  SixMomentReport rep;
  const std::vector<int> orders =
      t.symmetric() ? std::vector<int>{2, 4, 6} : std::vector<int>{2, 3, 4, 5, 6};
  for (int j : orders) {
    rep.orders.push_back(j);
    rep.kernel_moments.push_back(km[j - 1]);
    rep.target_moments.push_back(tm[j - 1]);
    rep.gaps.push_back(std::abs(km[j - 1] - tm[j - 1]));
  }
  return rep;
}

BoundReport gauss_bound2(const Kernel2& a, double variance) {
  if (!(variance > 0.0)) throw std::invalid_argument("gauss_bound2: variance must be > 0");
  const double k3 = cumulant2(a, 3);
  const double T = cumulant2(a, 6) / 120.0 + 0.25 * k3 * k3;
  const double gap = std::abs(variance - cumulant2(a, 2));
  BoundReport rep;
  rep.kind = "gauss_bound2";
  rep.add("T", T);
  rep.add("sqrt_T", std::sqrt(std::max(T, 0.0)));
  rep.add("variance_gap", gap);
  rep.add("total_verbatim", T + gap);
  rep.interior_negative = T < -1e-9;
  rep.total = rep.c1 * std::sqrt(std::max(T, 0.0)) + rep.c2 * gap;
  return rep;
}

double cross_gamma_path(const Kernel2& a, const Kernel2& b, std::span<const double> z) {
  check_same_dim(a, b, "cross_gamma_path");
  if (static_cast<int>(z.size()) != a.dim())
    throw std::invalid_argument("cross_gamma_path: z length does not match kernel dimension");
  const Eigen::Map<const Eigen::VectorXd> zv(z.data(), a.dim());
  return 2.0 * (a.matrix() * zv).dot(b.matrix() * zv);
}

double cov_squares(const Kernel2& a, const Kernel2& b) {
  check_same_dim(a, b, "cov_squares");
  const Eigen::MatrixXd& x = a.matrix();
  const Eigen::MatrixXd& y = b.matrix();
  const Eigen::MatrixXd xy = x * y;
  const double t_a2b2 = trace_product(x * x, y * y);
  const double t_abab = (xy * xy).trace();
  const double t_ab = trace_product(x, y);
  return 32.0 * t_a2b2 + 16.0 * t_abab + 8.0 * t_ab * t_ab;
}

void write_kernel_csv(std::ostream& os, const Kernel2& a) {
  const auto prec = os.precision(17);
  for (int i = 0; i < a.dim(); ++i) {
    for (int j = 0; j < a.dim(); ++j) {
      if (j) os << ',';
      os << a(i, j);
    }
    os << '\n';
  }
  os.precision(prec);
}

Kernel2 read_kernel_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("read_kernel_csv: bad number '" + cell + "'");
      }
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  const auto d = static_cast<Eigen::Index>(rows.size());
  if (d == 0) throw std::invalid_argument("read_kernel_csv: empty input");
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != d)
      throw std::invalid_argument("read_kernel_csv: matrix is not square");
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rows[i][j];
  }
  return Kernel2(m);
}

}  // namespace vgchaos
