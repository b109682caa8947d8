#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "vgchaos/chaos2.hpp"
#include "vgchaos/report.hpp"
#include "vgchaos/vgdist.hpp"

namespace vgchaos {

inline constexpr int kMaxTensorDim = 6;
inline constexpr int kMaxChaosOrder = 4;
inline constexpr int kMaxTensorOrder = 8;

// Dense row-major tensor of shape d x ... x d. Order 0 holds one scalar.
class Tensor {
 public:
  Tensor() : order_(0), dim_(1), data_(1, 0.0) {}
  Tensor(int order, int dim);
  Tensor(int order, int dim, std::vector<double> data);
  static Tensor scalar(double v, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }
  std::size_t size() const { return data_.size(); }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  double& operator[](std::size_t k) { return data_[k]; }
  double operator[](std::size_t k) const { return data_[k]; }
  double at(std::span<const int> idx) const;
  double& at(std::span<const int> idx);
  double value() const;  // order 0 only

  double norm2() const;
  double norm() const;
  double inner(const Tensor& other) const;

  Tensor& operator+=(const Tensor& o);
  Tensor& operator-=(const Tensor& o);
  Tensor& operator*=(double c);

 private:
  std::size_t flat(std::span<const int> idx) const;
  int order_;
  int dim_;
  std::vector<double> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(double c, Tensor a);

// Tensor invariant under every index permutation.
class SymTensor {
 public:
  SymTensor() = default;
  // Checks every adjacent transposition entrywise; throws when asymmetry exceeds tol.
  explicit SymTensor(Tensor t, double tol = 1e-12);

  const Tensor& tensor() const { return t_; }
  int order() const { return t_.order(); }
  int dim() const { return t_.dim(); }
  double norm2() const { return t_.norm2(); }
  double norm() const { return t_.norm(); }
  double inner(const SymTensor& o) const { return t_.inner(o.t_); }
  double value() const { return t_.value(); }

  SymTensor scaled(double c) const;
  SymTensor plus(const SymTensor& o) const;

 private:
  friend SymTensor symmetrize(const Tensor& t);
  struct Trusted {};
  SymTensor(Tensor t, Trusted) : t_(std::move(t)) {}
  Tensor t_;
};

// f (x)_r g: last r slots of f against the first r slots of g.
Tensor contract(const Tensor& f, const Tensor& g, int r);
inline Tensor contract(const SymTensor& f, const SymTensor& g, int r) {
  return contract(f.tensor(), g.tensor(), r);
}
// Exact average over all index permutations (orbit means).
SymTensor symmetrize(const Tensor& t);
// f (x)~_r g
SymTensor sym_contract(const SymTensor& f, const SymTensor& g, int r);

double binomial(int n, int k);
double cq(int q, std::span<const int> rs);
double cq(int q, std::initializer_list<int> rs);

// Chaos expansion sum_level I_level(kernel); level 0 is a scalar.
struct GammaDecomposition {
  std::map<int, SymTensor> levels;

  double scalar() const;
  bool has(int level) const { return levels.count(level) > 0; }
  const SymTensor& at(int level) const { return levels.at(level); }
  void accumulate(int level, const SymTensor& kernel);
  // E[X^2] = sum level! |g_level|^2
  double second_moment() const;
};

GammaDecomposition gamma2_decomp(const SymTensor& f);
GammaDecomposition gamma3_decomp(const SymTensor& f);
double gamma3_second_moment(const SymTensor& f);
// E[I_q(f)^3]; zero for odd q.
double third_moment(const SymTensor& f);

BoundReport vg_contraction_bound(const SymTensor& f, const VGParams& target);
double symgamma_contraction_bound(const SymTensor& f, double lambda);

// Two-chaos sum I_{q1}(f1) + I_{q2}(f2), q1 < q2.
BoundReport mixed_sum_bound(const SymTensor& f1, const SymTensor& f2, double lambda);

// Exact chaos expansion of Gamma_3 of a two-chaos sum.
GammaDecomposition mixed_gamma3_decomp(const SymTensor& f1, const SymTensor& f2);

// Probabilists' Hermite polynomial He_n(x).
double hermite(int n, double x);
double sample_multiple_integral(const SymTensor& f, std::span<const double> z);
std::vector<double> sample_multiple_integrals(const SymTensor& f, std::size_t n,
                                              std::uint64_t seed);

struct ContractionPair {
  int r = 0;
  int rp = 0;
  int level = 0;
  double lhs = 0.0;     // |(f (x)~_r f) (x)~_rp f|
  double margin = 0.0;  // rhs - lhs
};
struct DoubleContractionReport {
  std::vector<ContractionPair> pairs;
  double rhs = 0.0;  // max_l |f (x)_l f|^{3/2}
  double worst_margin = 0.0;
  double worst_margin_scalar = 0.0;     // pairs with level 0
  double worst_margin_nonscalar = 0.0;  // pairs with level > 0
  bool has_scalar = false;
  bool has_nonscalar = false;
};
DoubleContractionReport double_vs_single_contraction_check(const SymTensor& f);

SymTensor random_symtensor(int q, int d, std::uint64_t seed);
SymTensor from_kernel2(const Kernel2& a);
Kernel2 to_kernel2(const SymTensor& f);
// Symmetrized e_{i1} (x) ... (x) e_{iq}.
SymTensor basis_symtensor(int d, std::span<const int> idx);

}  // namespace vgchaos
