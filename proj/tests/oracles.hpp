#pragma once
// Brute-force oracles used only by tests. Nothing here shares code with the library.

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <vector>

#include "vgchaos/tensorq.hpp"

namespace oracle {

// Polynomial in the Hermite basis: multi-index of per-coordinate degrees -> coefficient.
using HPoly = std::map<std::vector<int>, double>;

inline double fact(int n) { return std::tgamma(n + 1.0); }
inline double choose(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::round(fact(n) / (fact(k) * fact(n - k)));
}

inline void add_to(HPoly& p, const HPoly& q, double s = 1.0) {
  for (const auto& [a, c] : q) p[a] += s * c;
}

// He_m He_n = sum_k k! C(m,k) C(n,k) He_{m+n-2k}
inline HPoly mul(const HPoly& p, const HPoly& q) {
  HPoly r;
  for (const auto& [a, ca] : p)
    for (const auto& [b, cb] : q) {
      const int d = static_cast<int>(a.size());
      std::vector<std::vector<std::pair<int, double>>> per(d);
      for (int i = 0; i < d; ++i)
        for (int k = 0; k <= std::min(a[i], b[i]); ++k)
          per[i].push_back({a[i] + b[i] - 2 * k, fact(k) * choose(a[i], k) * choose(b[i], k)});
      std::vector<int> pick(d, 0);
      while (true) {
        std::vector<int> idx(d);
        double w = ca * cb;
        for (int i = 0; i < d; ++i) {
          idx[i] = per[i][pick[i]].first;
          w *= per[i][pick[i]].second;
        }
        r[idx] += w;
        int i = 0;
        while (i < d && ++pick[i] == static_cast<int>(per[i].size())) pick[i++] = 0;
        if (i == d) break;
      }
    }
  return r;
}

inline HPoly deriv(const HPoly& p, int i) {
  HPoly r;
  for (const auto& [a, c] : p)
    if (a[i] > 0) {
      auto b = a;
      --b[i];
      r[b] += c * a[i];
    }
  return r;
}

// -L^{-1}
inline HPoly minus_l_inv(const HPoly& p) {
  HPoly r;
  for (const auto& [a, c] : p) {
    int deg = 0;
    for (int x : a) deg += x;
    if (deg > 0) r[a] = c / deg;
  }
  return r;
}

inline double expect_sq(const HPoly& p) {
  double s = 0.0;
  for (const auto& [a, c] : p) {
    double w = c * c;
    for (int x : a) w *= fact(x);
    s += w;
  }
  return s;
}

inline double constant(const HPoly& p) {
  for (const auto& [a, c] : p) {
    bool zero = true;
    for (int x : a) zero = zero && x == 0;
    if (zero) return c;
  }
  return 0.0;
}

// I_q(f) for a symmetric tensor over R^d.
inline HPoly multiple_integral(const vgchaos::SymTensor& f) {
  const int q = f.order(), d = f.dim();
  HPoly p;
  std::vector<int> idx(q, 0);
  for (std::size_t k = 0; k < f.tensor().size(); ++k) {
    std::size_t rem = k;
    for (int j = q - 1; j >= 0; --j) {
      idx[j] = static_cast<int>(rem % d);
      rem /= d;
    }
    std::vector<int> a(d, 0);
    for (int i : idx) ++a[i];
    p[a] += f.tensor()[k];
  }
  return p;
}

// <DF, -DL^{-1} G>
inline HPoly gamma_next(const HPoly& f, const HPoly& g, int d) {
  const HPoly lg = minus_l_inv(g);
  HPoly r;
  for (int i = 0; i < d; ++i) add_to(r, mul(deriv(f, i), deriv(lg, i)));
  return r;
}

// Kernel at a level turned into a Hermite polynomial.
inline HPoly from_level(const vgchaos::SymTensor& g, int level, int d) {
  if (level == 0) return {{std::vector<int>(d, 0), g.value()}};
  return multiple_integral(g);
}

inline HPoly from_decomp(const vgchaos::GammaDecomposition& dec, int d) {
  HPoly p;
  for (const auto& [lev, g] : dec.levels) add_to(p, from_level(g, lev, d));
  return p;
}

// E[prod_k z'M_k z] for standard Gaussian z by summing over all index tuples
// with the exact product moment prod_i E[z_i^{n_i}].
inline double quad_form_moment(const std::vector<Eigen::MatrixXd>& ms) {
  const int m = static_cast<int>(ms.size());
  const int d = static_cast<int>(ms[0].rows());
  const int slots = 2 * m;
  std::vector<int> idx(slots, 0);
  auto even_moment = [](int n) {
    if (n % 2) return 0.0;
    double v = 1.0;
    for (int k = n - 1; k > 0; k -= 2) v *= k;
    return v;
  };
  double total = 0.0;
  while (true) {
    double coef = 1.0;
    for (int k = 0; k < m && coef != 0.0; ++k) coef *= ms[k](idx[2 * k], idx[2 * k + 1]);
    if (coef != 0.0) {
      std::vector<int> cnt(d, 0);
      for (int i : idx) ++cnt[i];
      double w = 1.0;
      for (int c : cnt) w *= even_moment(c);
      total += coef * w;
    }
    int s = 0;
    while (s < slots && ++idx[s] == d) idx[s++] = 0;
    if (s == slots) break;
  }
  return total;
}

// Cov(F_a^2, F_b^2), F = z'Az - Tr A, expanded into raw quadratic-form moments.
inline double cov_squares_isserlis(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  const double ta = a.trace(), tb = b.trace();
  auto e = [&](int pa, int pb) {
    std::vector<Eigen::MatrixXd> ms;
    for (int i = 0; i < pa; ++i) ms.push_back(a);
    for (int i = 0; i < pb; ++i) ms.push_back(b);
    if (ms.empty()) return 1.0;
    return quad_form_moment(ms);
  };
  // (Qa - ta)^2 (Qb - tb)^2 expanded by binomial coefficients.
  const double ca[3] = {ta * ta, -2.0 * ta, 1.0};
  const double cb[3] = {tb * tb, -2.0 * tb, 1.0};
  double joint = 0.0, ma = 0.0, mb = 0.0;
  for (int i = 0; i < 3; ++i) {
    ma += ca[i] * e(i, 0);
    mb += cb[i] * e(0, i);
    for (int j = 0; j < 3; ++j) joint += ca[i] * cb[j] * e(i, j);
  }
  return joint - ma * mb;
}

}  // namespace oracle
