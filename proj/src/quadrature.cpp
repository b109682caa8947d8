#include "vgchaos/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <map>
#include <mutex>

namespace vgchaos::quad {

namespace {

// Golub-Welsch: nodes are eigenvalues of the Jacobi matrix, weights come from
// the first eigenvector components scaled by the total mass.
Rule golub_welsch(int n, const std::vector<double>& offdiag, double mass) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    j(i, i + 1) = offdiag[i];
    j(i + 1, i) = offdiag[i];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = es.eigenvalues()(i);
    const double v = es.eigenvectors()(0, i);
    rule.weights[i] = mass * v * v;
  }
  return rule;
}

std::mutex cache_mutex;
std::map<std::pair<int, int>, Rule> cache;

const Rule& cached(int kind, int n) {
  std::lock_guard<std::mutex> lock(cache_mutex);
  auto it = cache.find({kind, n});
  if (it != cache.end()) return it->second;
  std::vector<double> off(n > 0 ? n - 1 : 0);
  Rule rule;
  if (kind == 0) {
    for (int i = 0; i + 1 < n; ++i) off[i] = std::sqrt(static_cast<double>(i + 1));
    rule = golub_welsch(n, off, 1.0);
  } else {
    for (int i = 0; i + 1 < n; ++i) {
      const double k = i + 1;
      off[i] = k / std::sqrt(4.0 * k * k - 1.0);
    }
    rule = golub_welsch(n, off, 2.0);
  }
  return cache.emplace(std::make_pair(kind, n), std::move(rule)).first->second;
}

}  // namespace

Rule gauss_hermite_normal(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite_normal: n must be positive");
  return cached(0, n);
}

Rule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be positive");
  return cached(1, n);
}

}  // namespace vgchaos::quad
