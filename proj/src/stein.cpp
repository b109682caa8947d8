#include "vgchaos/stein.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "vgchaos/errors.hpp"
#include "vgchaos/quadrature.hpp"
#include "vgchaos/summation.hpp"

namespace vgchaos {

SteinConstants stein_constants(double lambda, double r) {
  if (!(lambda > 0.0)) throw std::invalid_argument("stein_constants: lambda must be > 0");
  if (!(r >= 1.0) || r != std::floor(r))
    throw UnsupportedError("stein_constants: the explicit constants are stated only for positive "
                           "integer r (got r = " + std::to_string(r) + ")");
  const double pi = std::numbers::pi;
  const double lg = std::lgamma(0.5 * r) - std::lgamma(0.5 * r + 0.5);
  SteinConstants c;
  c.c0 = (1.0 / r + pi * std::exp(lg) / 2.0) / std::sqrt(lambda);
  c.c1 = (1.0 / r + 1.0 / (r + 1.0)) / lambda;
  const double br = std::sqrt(pi) / std::sqrt(2.0 * r + 3.0) + 1.0 / r;
  c.c2_1 = 3.0 / lambda * br;
  c.c2_2 = 4.0 / std::pow(lambda, 1.5) * br;
  return c;
}

TestFunction polynomial(std::vector<double> c) {
  auto eval = [](const std::vector<double>& a, double x) {
    double s = 0.0;
    for (auto it = a.rbegin(); it != a.rend(); ++it) s = s * x + *it;
    return s;
  };
  std::vector<double> d1, d2;
  for (std::size_t k = 1; k < c.size(); ++k) d1.push_back(static_cast<double>(k) * c[k]);
  for (std::size_t k = 1; k < d1.size(); ++k) d2.push_back(static_cast<double>(k) * d1[k]);
  return {[=](double x) { return eval(c, x); }, [=](double x) { return eval(d1, x); },
          [=](double x) { return eval(d2, x); }};
}

TestFunction monomial(int k) {
  if (k < 0) throw std::invalid_argument("monomial: negative degree");
  std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
  c.back() = 1.0;
  return polynomial(std::move(c));
}

double residual_symgamma(double lambda, double r, const TestFunction& f) {
  const VGParams p = special::sym_gamma(lambda, r);
  const double il2 = 1.0 / (lambda * lambda);
  return vg_expectation(p, [&](double y) {
    return il2 * y * f.d2f(y) + 2.0 * r * il2 * f.df(y) - y * f.f(y);
  });
}

double residual_vg(const VGParams& p, const TestFunction& f) {
  if (p.mu != 0.0) throw UnsupportedError("residual_vg: parameters must be given with mu = 0");
  const double s2 = p.sigma * p.sigma, rt = p.r * p.theta;
  return vg_expectation(p.centered(), [&](double y) {
    return s2 * (y + rt) * f.d2f(y) + (s2 * p.r + 2.0 * p.theta * (y + rt)) * f.df(y) - y * f.f(y);
  });
}

double laplace_identity(double b, const TestFunction& f) {
  const VGParams p = special::laplace(b);
  const double f0 = f.f(0.0);
  return vg_expectation(p, [&](double y) { return f.f(y) - f0 - b * b * f.d2f(y); });
}

double normal_residual(const TestFunction& f, int nodes) {
  const quad::Rule rule = quad::gauss_hermite_normal(nodes);
  CompensatedSum s;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double z = rule.nodes[i];
    s.add(rule.weights[i] * (f.df(z) - z * f.f(z)));
  }
  return s.value();
}

namespace {

// Chebyshev-Lobatto nodes on [-1, 1] in ascending order with barycentric weights.
void lobatto(int n, std::vector<double>& t, std::vector<double>& w) {
  t.resize(static_cast<std::size_t>(n) + 1);
  w.resize(t.size());
  for (int j = 0; j <= n; ++j) {
    t[static_cast<std::size_t>(j)] = -std::cos(std::numbers::pi * j / n);
    w[static_cast<std::size_t>(j)] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n) ? 0.5 : 1.0);
  }
}

Eigen::MatrixXd diff_matrix(const std::vector<double>& t, const std::vector<double>& w) {
  const auto n = static_cast<Eigen::Index>(t.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double diag = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      d(i, j) = (w[j] / w[i]) / (t[i] - t[j]);
      diag -= d(i, j);
    }
    d(i, i) = diag;
  }
  return d;
}

double bary(const std::vector<double>& x, const std::vector<double>& w,
            const std::vector<double>& v, double at) {
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double dx = at - x[j];
    if (dx == 0.0) return v[j];
    const double c = w[j] / dx;
    num += c * v[j];
    den += c;
  }
  return num / den;
}

struct Half {
  std::vector<double> edges;  // ascending
  bool singular_at_left;      // singular point is edges.front(), else edges.back()
};

std::vector<double> outward_edges(double len, double w0, double growth, double wmax) {
  std::vector<double> out{0.0};
  double y = 0.0, w = w0;
  while (y < len) {
    y = std::min(len, y + w);
    if (len - y < 0.3 * w) y = len;
    out.push_back(y);
    w = std::min(w * growth, wmax);
  }
  return out;
}

}  // namespace

SteinPoint SteinSolution::eval(double x) const {
  if (x < lower_ || x > upper_) {
    // Beyond the table the bounded solution behaves like -(h - E h)/x.
    const double g = h_(x) - eh_;
    return {x, -g / x, 0.0, 0.0};
  }
  auto it = std::lower_bound(elements_.begin(), elements_.end(), x,
                             [](const Element& e, double v) { return e.b < v; });
  if (it == elements_.end()) it = std::prev(elements_.end());
  return {x, bary(it->x, bary_, it->f, x), bary(it->x, bary_, it->df, x),
          bary(it->x, bary_, it->d2f, x)};
}

std::vector<SteinPoint> SteinSolution::table() const {
  std::vector<SteinPoint> out;
  for (const auto& e : elements_)
    for (std::size_t j = 0; j < e.x.size(); ++j) {
      if (!out.empty() && j == 0 && out.back().x == e.x[0]) continue;
      out.push_back({e.x[j], e.f[j], e.df[j], e.d2f[j]});
    }
  return out;
}

void SteinSolution::write_csv(std::ostream& os) const {
  const auto prec = os.precision(17);
  os << "x,f,df,d2f\n";
  for (const auto& p : table()) os << p.x << ',' << p.f << ',' << p.df << ',' << p.d2f << '\n';
  os.precision(prec);
}

std::vector<double> SteinSolution::sample_points() const {
  std::vector<double> xs;
  for (const auto& e : elements_) {
    for (std::size_t j = 0; j + 1 < e.x.size(); ++j) {
      xs.push_back(e.x[j]);
      for (int k = 1; k <= 3; ++k) xs.push_back(e.x[j] + (e.x[j + 1] - e.x[j]) * k / 4.0);
    }
    xs.push_back(e.x.back());
  }
  return xs;
}

double SteinSolution::residual_at(double x) const {
  const SteinPoint s = eval(x);
  const double s2 = p_.sigma * p_.sigma;
  const double u = x - x0_;
  return s2 * u * s.d2f + (s2 * p_.r + 2.0 * p_.theta * u) * s.df - x * s.f - (h_(x) - eh_);
}

double SteinSolution::sup_f() const {
  double m = 0.0;
  for (double x : sample_points()) m = std::max(m, std::abs(eval(x).f));
  return m;
}
double SteinSolution::sup_df() const {
  double m = 0.0;
  for (double x : sample_points()) m = std::max(m, std::abs(eval(x).df));
  return m;
}
double SteinSolution::sup_d2f() const {
  double m = 0.0;
  for (double x : sample_points()) m = std::max(m, std::abs(eval(x).d2f));
  return m;
}
double SteinSolution::sup_centered_h() const {
  double m = 0.0;
  for (double x : sample_points()) m = std::max(m, std::abs(h_(x) - eh_));
  return m;
}
double SteinSolution::sup_dh() const {
  double m = 0.0;
  for (double x : sample_points()) {
    const double step = 1e-5 * std::max(1.0, std::abs(x));
    m = std::max(m, std::abs(h_(x + step) - h_(x - step)) / (2.0 * step));
  }
  return m;
}

std::vector<SteinSolution> solve_stein_batch(const VGParams& p,
                                             const std::vector<std::function<double(double)>>& hs,
                                             const SteinGrid& grid) {
  if (p.mu != 0.0) throw UnsupportedError("solve_stein: parameters must be given with mu = 0");
  if (grid.nodes < 4) throw std::invalid_argument("solve_stein: need at least 4 nodes per element");
  const VGParams law = p.centered();
  const double x0 = -p.r * p.theta;
  const double s2 = p.sigma * p.sigma;
  const auto table = vg_cdf_table(law);
  const double lo = table->quantile(grid.tail_mass);
  const double hi = table->quantile(1.0 - grid.tail_mass);
  const double len = std::max(x0 - lo, hi - x0);
  const double sd = std::sqrt(p.variance());
  const double w0 = grid.first_width > 0.0 ? grid.first_width : 0.5 * std::min(1.0, sd);
  const std::vector<double> rel = outward_edges(len, w0, grid.growth, grid.max_width_factor * w0);

  const int n = grid.nodes;
  std::vector<double> t, w;
  lobatto(n, t, w);
  const Eigen::MatrixXd d_ref = diff_matrix(t, w);

  std::vector<double> ehs;
  for (const auto& h : hs) ehs.push_back(vg_expectation(law, h));

  std::vector<SteinSolution> sols(hs.size());
  for (std::size_t k = 0; k < hs.size(); ++k) {
    sols[k].p_ = p;
    sols[k].h_ = hs[k];
    sols[k].x0_ = x0;
    sols[k].lower_ = x0 - len;
    sols[k].upper_ = x0 + len;
    sols[k].eh_ = ehs[k];
    sols[k].bary_ = w;
  }

  Half halves[2];
  for (double r : rel) halves[1].edges.push_back(x0 + r);
  halves[1].singular_at_left = true;
  for (auto it = rel.rbegin(); it != rel.rend(); ++it) halves[0].edges.push_back(x0 - *it);
  halves[0].singular_at_left = false;

  std::vector<double> f_at_x0[2], df_at_x0[2];
  for (int side = 0; side < 2; ++side) {
    const Half& half = halves[side];
    const int ne = static_cast<int>(half.edges.size()) - 1;
    const int m = n + 1;
    const Eigen::Index size = static_cast<Eigen::Index>(ne) * m;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(size, size);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(size, static_cast<Eigen::Index>(hs.size()));
    std::vector<Eigen::MatrixXd> d1(ne), d2(ne);
    std::vector<std::vector<double>> xs(ne);
    Eigen::Index row = 0;
    auto put_rhs = [&](Eigen::Index rw, double x, bool far) {
      for (std::size_t k = 0; k < hs.size(); ++k) {
        const double g = hs[k](x) - ehs[k];
        rhs(rw, static_cast<Eigen::Index>(k)) = far ? -g / x : g;
      }
    };
    for (int e = 0; e < ne; ++e) {
      const double ea = half.edges[e], eb = half.edges[e + 1];
      d1[e] = d_ref * (2.0 / (eb - ea));
      d2[e] = d1[e] * d1[e];
      xs[e].resize(m);
      for (int j = 0; j < m; ++j) xs[e][j] = ea + 0.5 * (eb - ea) * (t[j] + 1.0);
      xs[e].front() = ea;
      xs[e].back() = eb;
    }
    for (int e = 0; e < ne; ++e) {
      const Eigen::Index off = static_cast<Eigen::Index>(e) * m;
      auto ode_row = [&](int j) {
        const double x = xs[e][j], u = x - x0;
        const double cf2 = s2 * u, cf1 = s2 * p.r + 2.0 * p.theta * u;
        a.block(row, off, 1, m) = cf2 * d2[e].row(j) + cf1 * d1[e].row(j);
        a(row, off + j) -= x;
        put_rhs(row, x, false);
        ++row;
      };
      for (int j = 1; j < n; ++j) ode_row(j);
      const bool first = e == 0, last = e == ne - 1;
      if (first) {
        if (half.singular_at_left) {
          ode_row(0);
        } else {
          a(row, off) = 1.0;
          put_rhs(row, xs[e][0], true);
          ++row;
        }
      }
      if (last) {
        if (!half.singular_at_left) {
          ode_row(n);
        } else {
          a(row, off + n) = 1.0;
          put_rhs(row, xs[e][n], true);
          ++row;
        }
      } else {
        const Eigen::Index nxt = off + m;
        a(row, off + n) = 1.0;
        a(row, nxt) = -1.0;
        ++row;
        a.block(row, off, 1, m) = d1[e].row(n);
        a.block(row, nxt, 1, m) -= d1[e + 1].row(0);
        ++row;
      }
    }
    if (row != size) throw std::logic_error("solve_stein: equation count mismatch");
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::MatrixXd sol = lu.solve(rhs);
    if (!sol.allFinite()) {
      throw SolverError("solve_stein: collocation system produced non-finite values");
    }
    for (std::size_t k = 0; k < hs.size(); ++k) {
      auto& out = sols[k];
      for (int e = 0; e < ne; ++e) {
        const Eigen::Index off = static_cast<Eigen::Index>(e) * m;
        const Eigen::VectorXd fv = sol.block(off, static_cast<Eigen::Index>(k), m, 1);
        const Eigen::VectorXd f1 = d1[e] * fv, f2 = d2[e] * fv;
        SteinSolution::Element el;
        el.a = half.edges[e];
        el.b = half.edges[e + 1];
        el.x = xs[e];
        el.f.assign(fv.data(), fv.data() + m);
        el.df.assign(f1.data(), f1.data() + m);
        el.d2f.assign(f2.data(), f2.data() + m);
        out.elements_.push_back(std::move(el));
      }
      {
        const auto& e = half.singular_at_left ? out.elements_[out.elements_.size() - ne]
                                              : out.elements_.back();
        const std::size_t j = half.singular_at_left ? 0 : static_cast<std::size_t>(n);
        f_at_x0[side].push_back(e.f[j]);
        df_at_x0[side].push_back(e.df[j]);
      }
    }
  }

  for (std::size_t k = 0; k < hs.size(); ++k) {
    auto& s = sols[k];
    s.jump_f_ = std::abs(f_at_x0[1][k] - f_at_x0[0][k]);
    s.jump_df_ = std::abs(df_at_x0[1][k] - df_at_x0[0][k]);
    double worst = 0.0;
    for (double x : s.sample_points())
      if (std::abs(x - x0) <= 0.8 * len) worst = std::max(worst, std::abs(s.residual_at(x)));
    s.residual_sup_ = worst;
    if (!(worst < 1e-3)) {
      std::ostringstream os;
      os << "solve_stein: collocation did not converge, interior residual " << worst
         << "; jumps at the singular point f " << s.jump_f_ << ", f' " << s.jump_df_;
      throw SolverError(os.str());
    }
  }
  return sols;
}

SteinSolution solve_stein(const VGParams& p, std::function<double(double)> h, const SteinGrid& grid) {
  auto sols = solve_stein_batch(p, {std::move(h)}, grid);
  return std::move(sols.front());
}

SteinBoundCheck stein_bound_check(const SteinSolution& sol, double lambda, double r) {
  SteinBoundCheck c;
  c.constants = stein_constants(lambda, r);
  c.sup_f = sol.sup_f();
  c.sup_df = sol.sup_df();
  c.sup_d2f = sol.sup_d2f();
  c.sup_centered_h = sol.sup_centered_h();
  c.sup_dh = sol.sup_dh();
  c.bound_f = c.constants.c0 * c.sup_centered_h;
  c.bound_df = c.constants.c1 * c.sup_centered_h;
  c.bound_d2f = c.constants.c2_1 * c.sup_dh + c.constants.c2_2 * c.sup_centered_h;
  return c;
}

}  // namespace vgchaos
