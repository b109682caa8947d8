#include "vgchaos/tensorq.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "vgchaos/errors.hpp"
#include "vgchaos/rng.hpp"
#include "vgchaos/summation.hpp"

namespace vgchaos {

namespace {

std::size_t ipow(int d, int n) {
  std::size_t s = 1;
  for (int i = 0; i < n; ++i) s *= static_cast<std::size_t>(d);
  return s;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

void check_shape(int order, int dim) {
  if (dim < 1) throw std::invalid_argument("Tensor: dim must be >= 1");
  if (order < 0) throw std::invalid_argument("Tensor: order must be >= 0");
  if (dim > kMaxTensorDim)
    throw CapacityError("Tensor: dim " + std::to_string(dim) + " exceeds cap " +
                        std::to_string(kMaxTensorDim));
  if (order > kMaxTensorOrder)
    throw CapacityError("Tensor: order " + std::to_string(order) + " exceeds cap " +
                        std::to_string(kMaxTensorOrder));
}

void check_chaos_order(const SymTensor& f, const char* who) {
  if (f.order() < 2) throw std::invalid_argument(std::string(who) + ": chaos order must be >= 2");
  if (f.order() > kMaxChaosOrder)
    throw CapacityError(std::string(who) + ": chaos order " + std::to_string(f.order()) +
                        " exceeds cap " + std::to_string(kMaxChaosOrder));
}

// Multi-index digits of a flat row-major index.
void digits(std::size_t k, int order, int dim, int* out) {
  for (int p = order - 1; p >= 0; --p) {
    out[p] = static_cast<int>(k % static_cast<std::size_t>(dim));
    k /= static_cast<std::size_t>(dim);
  }
}

std::size_t to_flat(const int* idx, int order, int dim) {
  std::size_t k = 0;
  for (int p = 0; p < order; ++p) k = k * static_cast<std::size_t>(dim) + static_cast<std::size_t>(idx[p]);
  return k;
}

}  // namespace

Tensor::Tensor(int order, int dim) : order_(order), dim_(dim) {
  check_shape(order, dim);
  data_.assign(ipow(dim, order), 0.0);
}

Tensor::Tensor(int order, int dim, std::vector<double> data) : order_(order), dim_(dim) {
  check_shape(order, dim);
  if (data.size() != ipow(dim, order))
    throw std::invalid_argument("Tensor: data has " + std::to_string(data.size()) +
                                " entries, expected " + std::to_string(ipow(dim, order)));
  data_ = std::move(data);
}

Tensor Tensor::scalar(double v, int dim) { return Tensor(0, dim, {v}); }

std::size_t Tensor::flat(std::span<const int> idx) const {
  if (static_cast<int>(idx.size()) != order_)
    throw std::invalid_argument("Tensor: index length does not match order");
  for (int i : idx)
    if (i < 0 || i >= dim_) throw std::out_of_range("Tensor: index out of range");
  return to_flat(idx.data(), order_, dim_);
}

double Tensor::at(std::span<const int> idx) const { return data_[flat(idx)]; }
double& Tensor::at(std::span<const int> idx) { return data_[flat(idx)]; }

double Tensor::value() const {
  if (order_ != 0) throw std::logic_error("Tensor::value: tensor is not a scalar");
  return data_[0];
}

double Tensor::norm2() const {
  CompensatedSum s;
  for (double x : data_) s.add(x * x);
  return s.value();
}

double Tensor::norm() const { return std::sqrt(norm2()); }

double Tensor::inner(const Tensor& o) const {
  if (o.order_ != order_ || o.dim_ != dim_) throw std::invalid_argument("Tensor::inner: shape mismatch");
  CompensatedSum s;
  for (std::size_t k = 0; k < data_.size(); ++k) s.add(data_[k] * o.data_[k]);
  return s.value();
}

Tensor& Tensor::operator+=(const Tensor& o) {
  if (o.order_ != order_ || o.dim_ != dim_) throw std::invalid_argument("Tensor: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& o) {
  if (o.order_ != order_ || o.dim_ != dim_) throw std::invalid_argument("Tensor: shape mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
  return *this;
}

Tensor& Tensor::operator*=(double c) {
  for (double& x : data_) x *= c;
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(double c, Tensor a) { return a *= c; }

SymTensor::SymTensor(Tensor t, double tol) : t_(std::move(t)) {
  const int n = t_.order(), d = t_.dim();
  if (n < 2) return;
  int idx[kMaxTensorOrder];
  double worst = 0.0;
  for (std::size_t k = 0; k < t_.size(); ++k) {
    digits(k, n, d, idx);
    for (int p = 0; p + 1 < n; ++p) {
      if (idx[p] == idx[p + 1]) continue;
      std::swap(idx[p], idx[p + 1]);
      worst = std::max(worst, std::abs(t_[k] - t_[to_flat(idx, n, d)]));
      std::swap(idx[p], idx[p + 1]);
    }
  }
  if (worst > tol)
    throw std::invalid_argument("SymTensor: asymmetry " + std::to_string(worst) + " exceeds tolerance");
}

SymTensor SymTensor::scaled(double c) const { return SymTensor(c * t_, Trusted{}); }

SymTensor SymTensor::plus(const SymTensor& o) const { return SymTensor(t_ + o.t_, Trusted{}); }

Tensor contract(const Tensor& f, const Tensor& g, int r) {
  if (f.dim() != g.dim()) throw std::invalid_argument("contract: dimension mismatch");
  if (r < 0 || r > std::min(f.order(), g.order()))
    throw std::invalid_argument("contract: r = " + std::to_string(r) + " out of range for orders " +
                                std::to_string(f.order()) + ", " + std::to_string(g.order()));
  const int d = f.dim();
  const int out_order = f.order() + g.order() - 2 * r;
  Tensor out(out_order, d);
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const auto fr = static_cast<Eigen::Index>(ipow(d, f.order() - r));
  const auto kr = static_cast<Eigen::Index>(ipow(d, r));
  const auto gc = static_cast<Eigen::Index>(ipow(d, g.order() - r));
  Eigen::Map<const RowMat> fm(f.data().data(), fr, kr);
  Eigen::Map<const RowMat> gm(g.data().data(), kr, gc);
  Eigen::Map<RowMat> om(out.data().data(), fr, gc);
  om.noalias() = fm * gm;
  return out;
}

SymTensor symmetrize(const Tensor& t) {
  const int n = t.order(), d = t.dim();
  if (n < 2) return SymTensor(t, SymTensor::Trusted{});
  // Averaging over all permutations equals the mean over each orbit of index tuples.
  std::vector<std::uint32_t> key(t.size());
  std::vector<double> sum(t.size(), 0.0);
  std::vector<std::uint32_t> count(t.size(), 0);
  int idx[kMaxTensorOrder];
  for (std::size_t k = 0; k < t.size(); ++k) {
    digits(k, n, d, idx);
    std::sort(idx, idx + n);
    const std::size_t c = to_flat(idx, n, d);
    key[k] = static_cast<std::uint32_t>(c);
    sum[c] += t[k];
    count[c] += 1;
  }
  Tensor out(n, d);
  for (std::size_t k = 0; k < t.size(); ++k) out[k] = sum[key[k]] / count[key[k]];
  return SymTensor(std::move(out), SymTensor::Trusted{});
}

SymTensor sym_contract(const SymTensor& f, const SymTensor& g, int r) {
  return symmetrize(contract(f.tensor(), g.tensor(), r));
}

double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return std::round(b);
}

double cq(int q, std::span<const int> rs) {
  if (q < 1) throw std::invalid_argument("cq: q must be >= 1");
  if (rs.empty()) throw std::invalid_argument("cq: empty index list");
  auto bad = [&](const std::string& why) {
    std::string list;
    for (int r : rs) list += (list.empty() ? "" : ",") + std::to_string(r);
    return std::invalid_argument("cq: inadmissible list (" + list + ") for q=" + std::to_string(q) +
                                 ": " + why);
  };
  if (rs[0] < 1 || rs[0] > q) throw bad("r1 must lie in 1..q");
  double c = q * factorial(rs[0] - 1) * std::pow(binomial(q - 1, rs[0] - 1), 2);
  int prefix = rs[0];
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const int a = static_cast<int>(i) + 1;
    const int ra = rs[i];
    if (2 * prefix >= a * q) throw bad("partial sum too large");
    const int upper = std::min(a * q - 2 * prefix, q);
    if (ra < 1 || ra > upper) throw bad("r" + std::to_string(a) + " out of range");
    c *= q * factorial(ra - 1) * binomial(a * q - 2 * prefix - 1, ra - 1) * binomial(q - 1, ra - 1);
    prefix += ra;
  }
  return c;
}

double cq(int q, std::initializer_list<int> rs) {
  return cq(q, std::span<const int>(rs.begin(), rs.size()));
}

double GammaDecomposition::scalar() const {
  auto it = levels.find(0);
  return it == levels.end() ? 0.0 : it->second.value();
}

void GammaDecomposition::accumulate(int level, const SymTensor& kernel) {
  auto it = levels.find(level);
  if (it == levels.end())
    levels.emplace(level, kernel);
  else
    it->second = it->second.plus(kernel);
}

double GammaDecomposition::second_moment() const {
  CompensatedSum s;
  for (const auto& [lev, g] : levels) s.add(factorial(lev) * g.norm2());
  return s.value();
}

GammaDecomposition gamma2_decomp(const SymTensor& f) {
  check_chaos_order(f, "gamma2_decomp");
  const int q = f.order();
  GammaDecomposition out;
  out.accumulate(0, SymTensor(Tensor::scalar(factorial(q) * f.norm2(), f.dim())));
  for (int r = 1; r < q; ++r) out.accumulate(2 * q - 2 * r, sym_contract(f, f, r).scaled(cq(q, {r})));
  return out;
}

GammaDecomposition gamma3_decomp(const SymTensor& f) {
  check_chaos_order(f, "gamma3_decomp");
  const int q = f.order();
  GammaDecomposition out;
  for (int r = 1; r < q; ++r) {
    const SymTensor inner = sym_contract(f, f, r);
    for (int s = 1; s <= std::min(2 * q - 2 * r, q); ++s) {
      const int level = 3 * q - 2 * r - 2 * s;
      out.accumulate(level, sym_contract(inner, f, s).scaled(cq(q, {r, s})));
    }
  }
  return out;
}

double gamma3_second_moment(const SymTensor& f) { return gamma3_decomp(f).second_moment(); }

double third_moment(const SymTensor& f) {
  check_chaos_order(f, "third_moment");
  const int q = f.order();
  if (q % 2 != 0) return 0.0;
  const int h = q / 2;
  const double coef = factorial(q) * factorial(h) * std::pow(binomial(q, h), 2);
  return coef * f.inner(sym_contract(f, f, h));
}

BoundReport vg_contraction_bound(const SymTensor& f, const VGParams& t) {
  check_chaos_order(f, "vg_contraction_bound");
  if (t.mu != 0.0) throw UnsupportedError("vg_contraction_bound: target must have mu = 0");
  const int q = f.order();
  if (q % 2 != 0 && t.theta != 0.0)
    throw UnsupportedError(
        "vg_contraction_bound: odd chaos order with theta != 0; odd chaoses have zero third "
        "moment and cannot approach an asymmetric target");
  const double s2 = t.sigma * t.sigma;
  const double var = factorial(q) * f.norm2();
  const GammaDecomposition g3 = gamma3_decomp(f);

  const double gap = 0.5 * third_moment(f) - (2.0 * t.theta * var + t.r * t.theta * s2);

  // Middle level q.
  Tensor mid = -s2 * f.tensor();
  if (g3.has(q)) mid += g3.at(q).tensor();
  if (q % 2 == 0) mid -= 2.0 * t.theta * cq(q, {q / 2}) * sym_contract(f, f, q / 2).tensor();
  const double middle = factorial(q) * mid.norm2();

  CompensatedSum corrected, top;
  for (const auto& [level, g] : g3.levels) {
    if (level == 0 || level == q) continue;
    if (level <= 2 * q - 2) {
      Tensor k = g.tensor();
      if (level % 2 == 0) {
        const int r = q - level / 2;
        k -= 2.0 * t.theta * cq(q, {r}) * sym_contract(f, f, r).tensor();
      }
      corrected.add(factorial(level) * k.norm2());
    } else {
      top.add(factorial(level) * g.norm2());
    }
  }
  // Gamma_2 levels absent from Gamma_3 still carry the 2 theta correction.
  if (t.theta != 0.0) {
    for (int r = 1; r < q; ++r) {
      const int level = 2 * q - 2 * r;
      if (level == q || g3.has(level)) continue;
      corrected.add(factorial(level) *
                    std::pow(2.0 * t.theta * cq(q, {r}), 2) * sym_contract(f, f, r).norm2());
    }
  }

  const double interior = gap * gap + middle + corrected.value() + top.value();
  BoundReport rep;
  rep.kind = "vg_contraction_bound";
  rep.add("third_moment_gap_sq", gap * gap);
  rep.add("middle", middle);
  rep.add("corrected_levels", corrected.value());
  rep.add("top_levels", top.value());
  rep.add("interior", interior);
  const double term1 = std::sqrt(std::max(interior, 0.0));
  const double term2 = std::abs(t.variance() - var);
  rep.add("term1", term1);
  rep.add("term2", term2);
  rep.interior_negative = interior < -1e-9;
  rep.total = rep.c1 * term1 + rep.c2 * term2;
  return rep;
}

double symgamma_contraction_bound(const SymTensor& f, double lambda) {
  check_chaos_order(f, "symgamma_contraction_bound");
  if (!(lambda > 0.0)) throw std::invalid_argument("symgamma_contraction_bound: lambda must be > 0");
  const int q = f.order();
  GammaDecomposition g3 = gamma3_decomp(f);
  CompensatedSum s;
  Tensor mid = (1.0 / (lambda * lambda)) * f.tensor();
  if (g3.has(q)) mid -= g3.at(q).tensor();
  s.add(factorial(q) * mid.norm2());
  for (const auto& [level, g] : g3.levels)
    if (level != q) s.add(factorial(level) * g.norm2());
  return s.value();
}

namespace {

struct MixedTerm {
  int i, j, k, r, s, level;
  double coef;
  SymTensor kernel;
};

std::vector<MixedTerm> mixed_terms(const SymTensor& f1, const SymTensor& f2) {
  const SymTensor* fs[2] = {&f1, &f2};
  std::vector<MixedTerm> out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) {
        const int qi = fs[i]->order(), qj = fs[j]->order(), qk = fs[k]->order();
        for (int r = 1; r <= std::min(qj, qk); ++r) {
          const int inner_order = qj + qk - 2 * r;
          if (inner_order == 0) continue;
          const SymTensor inner = sym_contract(*fs[j], *fs[k], r);
          for (int s = 1; s <= std::min(qi, inner_order); ++s) {
            const double coef = qi * qj * factorial(r - 1) * binomial(qj - 1, r - 1) *
                                binomial(qk - 1, r - 1) * factorial(s - 1) *
                                binomial(qi - 1, s - 1) * binomial(inner_order - 1, s - 1);
            const int level = qi + inner_order - 2 * s;
            out.push_back({i, j, k, r, s, level, coef, sym_contract(*fs[i], inner, s)});
          }
        }
      }
  return out;
}

void check_mixed(const SymTensor& f1, const SymTensor& f2) {
  check_chaos_order(f1, "mixed_sum_bound");
  check_chaos_order(f2, "mixed_sum_bound");
  if (f1.order() >= f2.order())
    throw std::invalid_argument("mixed_sum_bound: requires q1 < q2 (got " +
                                std::to_string(f1.order()) + ", " + std::to_string(f2.order()) + ")");
  if (f1.dim() != f2.dim()) throw std::invalid_argument("mixed_sum_bound: dimension mismatch");
}

}  // namespace

GammaDecomposition mixed_gamma3_decomp(const SymTensor& f1, const SymTensor& f2) {
  check_mixed(f1, f2);
  GammaDecomposition out;
  for (const auto& t : mixed_terms(f1, f2)) out.accumulate(t.level, t.kernel.scaled(t.coef));
  return out;
}

BoundReport mixed_sum_bound(const SymTensor& f1, const SymTensor& f2, double lambda) {
  check_mixed(f1, f2);
  if (!(lambda > 0.0)) throw std::invalid_argument("mixed_sum_bound: lambda must be > 0");
  const double il2 = 1.0 / (lambda * lambda);
  const SymTensor* fs[2] = {&f1, &f2};
  const auto terms = mixed_terms(f1, f2);

  double own_exact[2], own_plain[2];
  for (int l = 0; l < 2; ++l) {
    const int q = fs[l]->order();
    Tensor d = il2 * fs[l]->tensor();
    for (const auto& t : terms)
      if (t.i == l && t.j == l && t.k == l && t.s == q - t.r) d -= t.coef * t.kernel.tensor();
    own_plain[l] = d.norm2();
    own_exact[l] = factorial(q) * own_plain[l];
  }

  CompensatedSum cross_energy, cross_displayed;
  std::size_t count = 0;
  for (const auto& t : terms) {
    if (t.i == t.j && t.j == t.k && t.s == fs[t.i]->order() - t.r) continue;
    ++count;
    const double kn = t.kernel.norm2();
    cross_energy.add(t.coef * t.coef * factorial(t.level) * kn);
    cross_displayed.add(t.coef * kn);
  }

  GammaDecomposition g3;
  for (const auto& t : terms) g3.accumulate(t.level, t.kernel.scaled(-t.coef));
  for (int l = 0; l < 2; ++l) g3.accumulate(fs[l]->order(), fs[l]->scaled(il2));
  const double exact = g3.second_moment();

  BoundReport rep;
  rep.kind = "mixed_sum_bound";
  rep.add("own_1", own_exact[0]);
  rep.add("own_2", own_exact[1]);
  rep.add("cross_terms", static_cast<double>(count));
  rep.add("cross_energy", cross_energy.value());
  const double bound = 8.0 * (own_exact[0] + own_exact[1]) + 2.0 * count * cross_energy.value();
  rep.add("displayed", 8.0 * (own_plain[0] + own_plain[1]) + cross_displayed.value());
  rep.add("bound", bound);
  rep.add("exact", exact);
  rep.total = bound;
  return rep;
}

double hermite(int n, double x) {
  if (n < 0) throw std::invalid_argument("hermite: negative degree");
  double h0 = 1.0, h1 = x;
  if (n == 0) return h0;
  for (int k = 1; k < n; ++k) {
    const double h2 = x * h1 - k * h0;
    h0 = h1;
    h1 = h2;
  }
  return h1;
}

double sample_multiple_integral(const SymTensor& f, std::span<const double> z) {
  const int q = f.order(), d = f.dim();
  if (static_cast<int>(z.size()) != d)
    throw std::invalid_argument("sample_multiple_integral: z length does not match tensor dimension");
  if (q == 0) return f.value();
  double he[kMaxTensorDim][kMaxTensorOrder + 1];
  for (int j = 0; j < d; ++j)
    for (int m = 0; m <= q; ++m) he[j][m] = hermite(m, z[j]);
  int idx[kMaxTensorOrder];
  int mult[kMaxTensorDim];
  CompensatedSum s;
  const Tensor& t = f.tensor();
  for (std::size_t k = 0; k < t.size(); ++k) {
    if (t[k] == 0.0) continue;
    digits(k, q, d, idx);
    std::fill(mult, mult + d, 0);
    for (int p = 0; p < q; ++p) ++mult[idx[p]];
    double prod = t[k];
    for (int j = 0; j < d; ++j)
      if (mult[j]) prod *= he[j][mult[j]];
    s.add(prod);
  }
  return s.value();
}

std::vector<double> sample_multiple_integrals(const SymTensor& f, std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  const int d = f.dim();
  for_each_chunk(n, seed, [&](Philox4x32& rng, std::size_t b, std::size_t e) {
    std::vector<double> z(static_cast<std::size_t>(d));
    for (std::size_t i = b; i < e; ++i) {
      for (auto& x : z) x = rng.normal();
      out[i] = sample_multiple_integral(f, z);
    }
  });
  return out;
}

DoubleContractionReport double_vs_single_contraction_check(const SymTensor& f) {
  check_chaos_order(f, "double_vs_single_contraction_check");
  const int q = f.order();
  DoubleContractionReport rep;
  double single = 0.0;
  for (int l = 1; l < q; ++l) single = std::max(single, contract(f, f, l).norm());
  rep.rhs = std::pow(single, 1.5);
  rep.worst_margin = std::numeric_limits<double>::infinity();
  rep.worst_margin_scalar = std::numeric_limits<double>::infinity();
  rep.worst_margin_nonscalar = std::numeric_limits<double>::infinity();
  for (int r = 1; r < q; ++r) {
    const SymTensor inner = sym_contract(f, f, r);
    for (int rp = 1; rp <= std::min(q, 2 * q - 2 * r); ++rp) {
      ContractionPair p;
      p.r = r;
      p.rp = rp;
      p.level = 3 * q - 2 * r - 2 * rp;
      p.lhs = sym_contract(inner, f, rp).norm();
      p.margin = rep.rhs - p.lhs;
      rep.worst_margin = std::min(rep.worst_margin, p.margin);
      if (p.level == 0) {
        rep.has_scalar = true;
        rep.worst_margin_scalar = std::min(rep.worst_margin_scalar, p.margin);
      } else {
        rep.has_nonscalar = true;
        rep.worst_margin_nonscalar = std::min(rep.worst_margin_nonscalar, p.margin);
      }
      rep.pairs.push_back(p);
    }
  }
  return rep;
}

SymTensor random_symtensor(int q, int d, std::uint64_t seed) {
  Tensor t(q, d);
  Philox4x32 rng(seed, 0);
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = rng.normal();
  return symmetrize(t);
}

SymTensor from_kernel2(const Kernel2& a) {
  const int d = a.dim();
  Tensor t(2, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) t[static_cast<std::size_t>(i * d + j)] = a(i, j);
  return SymTensor(std::move(t));
}

Kernel2 to_kernel2(const SymTensor& f) {
  if (f.order() != 2) throw std::invalid_argument("to_kernel2: tensor order must be 2");
  const int d = f.dim();
  Eigen::MatrixXd m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = f.tensor()[static_cast<std::size_t>(i * d + j)];
  return Kernel2(m);
}

SymTensor basis_symtensor(int d, std::span<const int> idx) {
  Tensor t(static_cast<int>(idx.size()), d);
  t.at(idx) = 1.0;
  return symmetrize(t);
}

}  // namespace vgchaos
