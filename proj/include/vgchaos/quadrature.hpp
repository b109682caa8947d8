#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

#include "vgchaos/errors.hpp"
#include "vgchaos/summation.hpp"

namespace vgchaos::quad {

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
};

struct Options {
  double abs_tol = 1e-15;
  double rel_tol = 1e-12;
  int max_intervals = 5000;
};

namespace detail {

inline constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = fc * kWgk[7];
  double gauss = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kron += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) gauss += kWg[j / 2] * (f1 + f2);
  }
  kron *= h;
  gauss *= h;
  return {a, b, kron, std::abs(kron - gauss)};
}

}  // namespace detail

// Globally adaptive Gauss-Kronrod (7/15) on a finite interval.
template <class F>
Result integrate(F&& f, double a, double b, const Options& opt = {}) {
  if (a == b) return {};
  if (!(std::isfinite(a) && std::isfinite(b)))
    throw QuadratureError("integrate: interval endpoints must be finite");
  std::priority_queue<detail::Panel> heap;
  auto first = detail::gk15(f, a, b);
  heap.push(first);
  double total = first.value;
  double err = first.error;
  int count = 1;
  while (err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (count >= opt.max_intervals) {
      std::ostringstream os;
      os << "integrate: no convergence on [" << a << ", " << b << "] after " << count
         << " panels, estimate " << total << ", error " << err;
      throw QuadratureError(os.str());
    }
    auto worst = heap.top();
    heap.pop();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) {
      // Panel can no longer be split in double precision; accept it.
      heap.push({worst.a, worst.b, worst.value, 0.0});
      err -= worst.error;
      continue;
    }
    auto left = detail::gk15(f, worst.a, m);
    auto right = detail::gk15(f, m, worst.b);
    heap.push(left);
    heap.push(right);
    ++count;
    // Re-sum from the heap contents occasionally to keep drift small.
    total += left.value + right.value - worst.value;
    err += left.error + right.error - worst.error;
    if (count % 64 == 0) {
      auto copy = heap;
      CompensatedSum t, e;
      while (!copy.empty()) {
        t.add(copy.top().value);
        e.add(copy.top().error);
        copy.pop();
      }
      total = t.value();
      err = e.value();
    }
  }
  CompensatedSum t;
  double e = 0.0;
  while (!heap.empty()) {
    t.add(heap.top().value);
    e += heap.top().error;
    heap.pop();
  }
  return {t.value(), e, count};
}

// Integral over [a, +inf) for integrands with at least exponential decay.
// Panels of width h, 2h, 4h, ... until several consecutive panels are negligible.
template <class F>
Result integrate_upper_tail(F&& f, double a, double h, const Options& opt = {}) {
  CompensatedSum total;
  double err = 0.0;
  int quiet = 0;
  int panels = 0;
  double lo = a;
  double width = h;
  while (quiet < 3) {
    if (panels > 200) throw QuadratureError("integrate_upper_tail: integrand does not decay");
    auto r = integrate(f, lo, lo + width, opt);
    total.add(r.value);
    err += r.abs_error;
    panels += r.intervals;
    if (std::abs(r.value) <= 1e-17 * std::max(1.0, std::abs(total.value())))
      ++quiet;
    else
      quiet = 0;
    lo += width;
    width *= 2.0;
  }
  return {total.value(), err, panels};
}

template <class F>
Result integrate_lower_tail(F&& f, double b, double h, const Options& opt = {}) {
  auto g = [&f, b](double t) { return f(2.0 * b - t); };
  return integrate_upper_tail(g, b, h, opt);
}

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Hermite rule for the standard normal weight (weights sum to 1).
Rule gauss_hermite_normal(int n);

// Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

}  // namespace vgchaos::quad
