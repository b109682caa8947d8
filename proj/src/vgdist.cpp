#include "vgchaos/vgdist.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "vgchaos/errors.hpp"
#include "vgchaos/quadrature.hpp"
#include "vgchaos/rng.hpp"
#include "vgchaos/special.hpp"

namespace vgchaos {

VGParams::VGParams(double r_, double theta_, double sigma_, double mu_, std::string origin_)
    : r(r_), theta(theta_), sigma(sigma_), mu(mu_), origin(std::move(origin_)) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("VGParams: r must be > 0");
  if (!(sigma > 0.0) || !std::isfinite(sigma))
    throw std::invalid_argument("VGParams: sigma must be > 0");
  if (!std::isfinite(theta) || !std::isfinite(mu))
    throw std::invalid_argument("VGParams: theta and mu must be finite");
}

VGParams VGParams::centered() const { return VGParams(r, theta, sigma, -r * theta, origin); }

CumulantSet CumulantSet::from_moments(const std::array<double, 6>& m) {
  // kappa_n = m_n - sum_{k=1}^{n-1} C(n-1, k-1) kappa_k m_{n-k}
  CumulantSet out;
  for (int n = 1; n <= 6; ++n) {
    double v = m[n - 1];
    double binom = 1.0;  // C(n-1, k-1)
    for (int k = 1; k < n; ++k) {
      v -= binom * out.kappa[k - 1] * m[n - k - 1];
      binom = binom * (n - k) / k;
    }
    out.kappa[n - 1] = v;
  }
  return out;
}

std::array<double, 6> CumulantSet::moments() const {
  std::array<double, 6> m{};
  for (int n = 1; n <= 6; ++n) {
    double v = kappa[n - 1];
    double binom = 1.0;
    for (int k = 1; k < n; ++k) {
      v += binom * kappa[k - 1] * m[n - k - 1];
      binom = binom * (n - k) / k;
    }
    m[n - 1] = v;
  }
  return m;
}

namespace {

struct Density {
  double mu, r, nu, c, theta_s2, c_s2, log_norm, log_at_mu;
  BesselKOrder bk;

  explicit Density(const VGParams& p)
      : mu(p.mu),
        r(p.r),
        nu(p.nu()),
        c(std::hypot(p.theta, p.sigma)),
        theta_s2(p.theta / (p.sigma * p.sigma)),
        c_s2(std::hypot(p.theta, p.sigma) / (p.sigma * p.sigma)),
        log_norm(-std::log(p.sigma * std::sqrt(M_PI)) - std::lgamma(0.5 * p.r)),
        log_at_mu(0.0),
        bk(std::abs(p.nu())) {
    if (r > 1.0)
      log_at_mu = std::lgamma(nu) - std::log(2.0) + log_norm +
                  nu * std::log(p.sigma * p.sigma / (c * c));
  }

  double log_pdf(double x) const {
    const double y = x - mu;
    const double ay = std::abs(y);
    if (ay == 0.0 || c_s2 * ay < 1e-290) {
      if (r <= 1.0) {
        std::ostringstream os;
        os << "vg_density: pole at location x = " << mu << " for r = " << r << " <= 1";
        throw PoleAtLocation(os.str());
      }
      return log_at_mu;
    }
    return log_norm + theta_s2 * y + nu * std::log(ay / (2.0 * c)) + bk.log_k(c_s2 * ay);
  }
  double pdf(double x) const { return std::exp(log_pdf(x)); }
};

void require_centered_notation(const VGParams& p, const char* who) {
  if (p.mu != 0.0) {
    std::ostringstream os;
    os << who << ": only mu = 0 (the centered VG_c notation) is supported";
    throw UnsupportedError(os.str());
  }
}

// Decay rates of the density in x - mu on the right and left.
std::pair<double, double> tail_rates(const VGParams& p) {
  const double c = std::hypot(p.theta, p.sigma);
  const double s2 = p.sigma * p.sigma;
  // c - theta computed without cancellation for theta >> sigma.
  const double right = p.theta > 0.0 ? s2 / (c + p.theta) / s2 : (c - p.theta) / s2;
  const double left = p.theta < 0.0 ? s2 / (c - p.theta) / s2 : (c + p.theta) / s2;
  return {right, left};
}

double map_exponent(double r) { return r >= 1.0 ? 4.0 : 4.0 / r; }

double local_scale(const VGParams& p) {
  auto [br, bl] = tail_rates(p);
  return std::min({1.0 / br, 1.0 / bl, std::sqrt(p.variance())});
}

}  // namespace

double vg_log_density(const VGParams& p, double x) { return Density(p).log_pdf(x); }

double vg_density(const VGParams& p, double x) { return std::exp(vg_log_density(p, x)); }

CumulantSet vg_cumulants(const VGParams& p) {
  require_centered_notation(p, "vg_cumulants");
  const double r = p.r, t = p.theta, s2 = p.sigma * p.sigma;
  const double t2 = t * t, s4 = s2 * s2, t4 = t2 * t2;
  CumulantSet k;
  k(1) = 0.0;
  k(2) = r * (s2 + 2.0 * t2);
  k(3) = 2.0 * r * t * (3.0 * s2 + 4.0 * t2);
  k(4) = 6.0 * r * (s4 + 8.0 * s2 * t2 + 8.0 * t4);
  k(5) = 24.0 * r * t * (5.0 * s4 + 20.0 * s2 * t2 + 16.0 * t4);
  k(6) = 120.0 * r * (s2 + 2.0 * t2) * (s4 + 16.0 * s2 * t2 + 16.0 * t4);
  return k;
}

std::array<double, 6> vg_moments(const VGParams& p) {
  require_centered_notation(p, "vg_moments");
  const double r = p.r, t = p.theta, s2 = p.sigma * p.sigma, t2 = t * t;
  std::array<double, 6> m{};
  m[0] = 0.0;
  m[1] = r * (s2 + 2.0 * t2);
  m[2] = 2.0 * r * t * s2 + 4.0 * t * m[1];
  m[3] = (3.0 * s2 * (2.0 + r) + 6.0 * r * t2) * m[1] + 6.0 * t * m[2];
  m[4] = 12.0 * r * t * s2 * m[1] + (8.0 * r * t2 + 4.0 * r * s2 + 12.0 * s2) * m[2] +
         8.0 * t * m[3];
  m[5] = 20.0 * r * t * s2 * m[2] + (5.0 * s2 * (4.0 + r) + 10.0 * r * t2) * m[3] +
         10.0 * t * m[4];
  return m;
}

std::vector<double> vg_sample(const VGParams& p, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("vg_sample: n must be >= 1");
  std::vector<double> out(n);
  const double shape = 0.5 * p.r;
  for_each_chunk(n, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const double v = 2.0 * rng.gamma(shape);
      const double z = rng.normal();
      out[i] = p.mu + p.theta * v + p.sigma * std::sqrt(v) * z;
    }
  });
  return out;
}

double vg_expectation(const VGParams& p, const std::function<double(double)>& f,
                      double rel_tol) {
  Density d(p);
  const double a = local_scale(p);
  const double m = map_exponent(p.r);
  quad::Options opt;
  opt.rel_tol = rel_tol;
  opt.abs_tol = 1e-16;
  auto mapped = [&](double u) {
    if (u == 0.0) return 0.0;
    const double au = std::abs(u);
    const double x = p.mu + a * std::copysign(std::pow(au, m), u);
    // u below resolution of mu: the mapped integrand is bounded there.
    if (x == p.mu) return 0.0;
    return f(x) * d.pdf(x) * a * m * std::pow(au, m - 1.0);
  };
  auto plain = [&](double x) { return f(x) * d.pdf(x); };
  CompensatedSum total;
  total.add(quad::integrate(mapped, -1.0, 0.0, opt).value);
  total.add(quad::integrate(mapped, 0.0, 1.0, opt).value);
  total.add(quad::integrate_upper_tail(plain, p.mu + a, 2.0 * a, opt).value);
  total.add(quad::integrate_lower_tail(plain, p.mu - a, 2.0 * a, opt).value);
  return total.value();
}

CdfTable::CdfTable(const VGParams& p) : p_(p) {
  Density d(p);
  auto [br, bl] = tail_rates(p);
  rate_right_ = br;
  rate_left_ = bl;
  const double sd = std::sqrt(p.variance());
  const double scale = local_scale(p);
  a_ = scale;
  m_ = map_exponent(p.r);
  const int nt = 256;

  auto mapped_pdf = [&](double u) {
    if (u == 0.0) return 0.0;
    const double au = std::abs(u);
    const double x = p.mu + a_ * std::copysign(std::pow(au, m_), u);
    if (x == p.mu) return 0.0;
    return d.pdf(x) * a_ * m_ * std::pow(au, m_ - 1.0);
  };
  auto plain_pdf = [&](double x) { return d.pdf(x); };

  // Outer ends: beyond the bulk and where the remaining tail mass is negligible.
  auto far_end = [&](double dir, double rate) {
    double y = a_;
    const double bulk = std::max(0.0, dir * p.r * p.theta) + 12.0 * sd;
    while (y < bulk || d.log_pdf(p.mu + dir * y) - std::log(rate) > std::log(1e-18)) y *= 1.25;
    return y;
  };
  const double yr = far_end(1.0, br);
  const double yl = far_end(-1.0, bl);

  // Plain cell edges on one side, moving outward from a_ to yend.
  auto plain_edges = [&](double dir, double yend) {
    std::vector<double> ys{a_};
    double y = a_;
    while (y < yend) {
      const double dens = d.pdf(p.mu + dir * y) * scale;
      const double h = dens > 1e-6 ? scale / 64.0 : (dens > 1e-12 ? scale / 16.0 : scale / 4.0);
      y = std::min(yend, y + h);
      ys.push_back(y);
    }
    return ys;
  };

  std::vector<Cell> cells;
  auto add_plain = [&](double x0, double x1) {
    cells.push_back({x0, x1, x0, x1, 0.0, 0.0, d.pdf(x0), d.pdf(x1), false});
  };
  auto add_mapped = [&](double u0, double u1) {
    const double x0 = p.mu + a_ * std::copysign(std::pow(std::abs(u0), m_), u0);
    const double x1 = p.mu + a_ * std::copysign(std::pow(std::abs(u1), m_), u1);
    cells.push_back({x0, x1, u0, u1, 0.0, 0.0, mapped_pdf(u0), mapped_pdf(u1), true});
  };

  const auto left = plain_edges(-1.0, yl);
  for (std::size_t i = left.size() - 1; i > 0; --i) add_plain(p.mu - left[i], p.mu - left[i - 1]);
  for (int k = -nt; k < 0; ++k) add_mapped(static_cast<double>(k) / nt, static_cast<double>(k + 1) / nt);
  for (int k = 0; k < nt; ++k) add_mapped(static_cast<double>(k) / nt, static_cast<double>(k + 1) / nt);
  const auto right = plain_edges(1.0, yr);
  for (std::size_t i = 0; i + 1 < right.size(); ++i) add_plain(p.mu + right[i], p.mu + right[i + 1]);

  const double tail_left = d.pdf(cells.front().x0) / bl;
  const double tail_right = d.pdf(cells.back().x1) / br;
  CompensatedSum acc;
  acc.add(tail_left);
  quad::Options opt;
  opt.abs_tol = 1e-18;
  opt.rel_tol = 1e-13;
  for (auto& c : cells) {
    c.f0 = acc.value();
    double mass;
    if (c.mapped) {
      auto g = quad::detail::gk15(mapped_pdf, c.u0, c.u1);
      mass = g.error > 1e-14 * std::abs(g.value) + 1e-19 ? quad::integrate(mapped_pdf, c.u0, c.u1, opt).value : g.value;
    } else {
      auto g = quad::detail::gk15(plain_pdf, c.u0, c.u1);
      mass = g.error > 1e-14 * std::abs(g.value) + 1e-19 ? quad::integrate(plain_pdf, c.u0, c.u1, opt).value : g.value;
    }
    acc.add(mass);
    c.f1 = acc.value();
  }
  acc.add(tail_right);
  raw_mass_ = acc.value();
  for (auto& c : cells) {
    c.f0 /= raw_mass_;
    c.f1 /= raw_mass_;
    c.d0 /= raw_mass_;
    c.d1 /= raw_mass_;
  }
  cells_ = std::move(cells);
}

double CdfTable::to_u(const Cell& c, double x) const {
  if (!c.mapped) return x;
  const double y = x - p_.mu;
  return std::copysign(std::pow(std::abs(y) / a_, 1.0 / m_), y);
}

double CdfTable::to_x(const Cell& c, double u) const {
  if (!c.mapped) return u;
  return p_.mu + a_ * std::copysign(std::pow(std::abs(u), m_), u);
}

double CdfTable::eval(const Cell& c, double u) const {
  const double h = c.u1 - c.u0;
  const double s = (u - c.u0) / h;
  const double s2 = s * s, s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * c.f0 + (s3 - 2 * s2 + s) * h * c.d0 + (-2 * s3 + 3 * s2) * c.f1 +
         (s3 - s2) * h * c.d1;
}

std::size_t CdfTable::find_by_x(double x) const {
  auto it = std::upper_bound(cells_.begin(), cells_.end(), x,
                             [](double v, const Cell& c) { return v < c.x1; });
  if (it == cells_.end()) return cells_.size() - 1;
  return static_cast<std::size_t>(it - cells_.begin());
}

double CdfTable::cdf(double x) const {
  if (std::isnan(x)) throw std::domain_error("vg_cdf: x is NaN");
  if (x < lower()) return cells_.front().f0 * std::exp(rate_left_ * (x - lower()));
  if (x >= upper()) return 1.0 - (1.0 - cells_.back().f1) * std::exp(-rate_right_ * (x - upper()));
  const Cell& c = cells_[find_by_x(x)];
  return std::clamp(eval(c, to_u(c, x)), c.f0, c.f1);
}

double CdfTable::invert(const Cell& c, double target) const {
  double lo = c.u0, hi = c.u1;
  const double span = c.f1 - c.f0;
  double u = span > 0.0 ? c.u0 + (target - c.f0) / span * (c.u1 - c.u0) : 0.5 * (lo + hi);
  const double h = c.u1 - c.u0;
  for (int it = 0; it < 100; ++it) {
    const double g = eval(c, u) - target;
    if (g == 0.0) break;
    if (g > 0.0)
      hi = u;
    else
      lo = u;
    const double s = (u - c.u0) / h;
    const double s2 = s * s;
    const double deriv = (6 * s2 - 6 * s) * c.f0 / h + (3 * s2 - 4 * s + 1) * c.d0 +
                         (-6 * s2 + 6 * s) * c.f1 / h + (3 * s2 - 2 * s) * c.d1;
    double next = deriv > 0.0 ? u - g / deriv : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - u) <= 1e-15 * (std::abs(u) + h)) {
      u = next;
      break;
    }
    u = next;
  }
  return to_x(c, u);
}

double CdfTable::quantile(double u) const {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("vg_quantile: level must lie in (0, 1)");
  if (u < cells_.front().f0) return lower() + std::log(u / cells_.front().f0) / rate_left_;
  if (u > cells_.back().f1)
    return upper() - std::log((1.0 - u) / (1.0 - cells_.back().f1)) / rate_right_;
  auto it = std::lower_bound(cells_.begin(), cells_.end(), u,
                             [](const Cell& c, double v) { return c.f1 < v; });
  if (it == cells_.end()) --it;
  return invert(*it, u);
}

std::vector<double> CdfTable::quantiles_sorted(std::span<const double> levels) const {
  std::vector<double> out(levels.size());
  std::size_t j = 0;
  double prev = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double u = levels[i];
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("vg_quantile: level must lie in (0, 1)");
    if (u < prev) throw std::invalid_argument("quantiles_sorted: levels must be nondecreasing");
    prev = u;
    if (u < cells_.front().f0 || u > cells_.back().f1) {
      out[i] = quantile(u);
      continue;
    }
    while (j + 1 < cells_.size() && cells_[j].f1 < u) ++j;
    out[i] = invert(cells_[j], u);
  }
  return out;
}

std::shared_ptr<const CdfTable> vg_cdf_table(const VGParams& p) {
  static std::mutex mtx;
  static std::map<std::tuple<double, double, double, double>, std::shared_ptr<const CdfTable>> cache;
  const auto key = std::make_tuple(p.r, p.theta, p.sigma, p.mu);
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const CdfTable>(p);
  std::lock_guard<std::mutex> lock(mtx);
  if (cache.size() > 64) cache.clear();
  return cache.emplace(key, table).first->second;
}

double vg_cdf(const VGParams& p, double x) { return vg_cdf_table(p)->cdf(x); }

double vg_quantile(const VGParams& p, double u) {
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("vg_quantile: level must lie in (0, 1)");
  return vg_cdf_table(p)->quantile(u);
}

double symgamma_density(double lambda, double r, double x) {
  if (!(lambda > 0.0) || !(r > 0.0)) throw std::invalid_argument("symgamma_density: lambda, r > 0");
  const double y = std::abs(x);
  if (y == 0.0 && r <= 0.5) throw PoleAtLocation("symgamma_density: pole at 0 for r <= 1/2");
  const double log_c = 2.0 * r * std::log(lambda) - 2.0 * std::lgamma(r) - lambda * y;
  // Integrand of the convolution in s, the smaller of the two Gamma variates.
  auto g = [&](double s) {
    if (s <= 0.0) return 0.0;
    return std::exp(log_c + (r - 1.0) * (std::log(s) + std::log(s + y)) - 2.0 * lambda * s);
  };
  const double k = std::max(1.0, 2.0 / r);
  const double s1 = 1.0 / lambda;
  auto near = [&](double w) {
    if (w <= 0.0) return 0.0;
    return g(std::pow(w, k)) * k * std::pow(w, k - 1.0);
  };
  quad::Options opt;
  opt.abs_tol = 0.0;
  opt.rel_tol = 1e-13;
  return quad::integrate(near, 0.0, std::pow(s1, 1.0 / k), opt).value +
         quad::integrate_upper_tail(g, s1, s1, opt).value;
}

double reflected_gamma_density(double lambda, double r, double x) {
  const double y = std::abs(x);
  return std::exp(r * std::log(lambda) - std::log(2.0) - std::lgamma(r) + (r - 1.0) * std::log(y) -
                  lambda * y);
}

namespace special {

namespace {
void require(bool ok, const char* who, const char* what) {
  if (!ok) throw std::invalid_argument(std::string(who) + ": " + what);
}
}  // namespace

VGParams laplace(double b) {
  require(b > 0.0, "laplace", "b must be > 0");
  return VGParams(2.0, 0.0, b, 0.0, "laplace(b=" + std::to_string(b) + ")");
}

VGParams sym_gamma(double lambda, double r) {
  require(lambda > 0.0 && r > 0.0, "sym_gamma", "lambda and r must be > 0");
  return VGParams(2.0 * r, 0.0, 1.0 / lambda, 0.0,
                  "sym_gamma(lambda=" + std::to_string(lambda) + ",r=" + std::to_string(r) + ")");
}

VGParams product_normals(double rho, double sigma_x, double sigma_y) {
  require(rho > -1.0 && rho < 1.0, "product_normals", "rho must lie in (-1, 1)");
  require(sigma_x > 0.0 && sigma_y > 0.0, "product_normals", "sigma_x, sigma_y must be > 0");
  const double s = sigma_x * sigma_y;
  return VGParams(1.0, rho * s, s * std::sqrt(1.0 - rho * rho), 0.0, "product_normals");
}

VGParams gamma_difference(double r, double lambda1, double lambda2, double rho) {
  require(r > 0.0 && lambda1 > 0.0 && lambda2 > 0.0, "gamma_difference",
          "r, lambda1, lambda2 must be > 0");
  require(rho >= 0.0 && rho < 1.0, "gamma_difference", "rho must lie in [0, 1)");
  return VGParams(2.0 * r, 0.5 / lambda1 - 0.5 / lambda2,
                  std::sqrt(1.0 - rho * rho) / std::sqrt(lambda1 * lambda2), 0.0, "gamma_difference");
}

VGParams gauss_limit_sequence(double variance, double r) {
  require(variance > 0.0 && r > 0.0, "gauss_limit_sequence", "variance and r must be > 0");
  return VGParams(r, 0.0, std::sqrt(variance / r), 0.0, "gauss_limit_sequence");
}

VGParams gamma_limit_sequence(double lambda, double r, double sigma) {
  require(lambda > 0.0 && r > 0.0 && sigma > 0.0, "gamma_limit_sequence",
          "lambda, r, sigma must be > 0");
  return VGParams(2.0 * r, 0.5 / lambda, sigma, 0.0, "gamma_limit_sequence");
}

}  // namespace special

VGParams special_case(std::string_view kind, std::span<const double> args) {
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      std::ostringstream os;
      os << kind << ": expected " << n << " arguments, got " << args.size();
      throw std::invalid_argument(os.str());
    }
  };
  if (kind == "laplace") {
    need(1);
    return special::laplace(args[0]);
  }
  if (kind == "sym_gamma") {
    need(2);
    return special::sym_gamma(args[0], args[1]);
  }
  if (kind == "product_normals") {
    need(3);
    return special::product_normals(args[0], args[1], args[2]);
  }
  if (kind == "gamma_difference") {
    need(4);
    return special::gamma_difference(args[0], args[1], args[2], args[3]);
  }
  if (kind == "gauss_limit_sequence") {
    need(2);
    return special::gauss_limit_sequence(args[0], args[1]);
  }
  if (kind == "gamma_limit_sequence") {
    need(3);
    return special::gamma_limit_sequence(args[0], args[1], args[2]);
  }
  throw std::invalid_argument("special_case: unknown kind '" + std::string(kind) + "'");
}

}  // namespace vgchaos
