#include "qgx/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qgx/errors.hpp"

namespace qgx::stochastic {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the Jacobi matrix of the
// Hermite recurrence, weights sqrt(pi) times the squared first components.
QuadratureRule build_hermite(std::size_t n) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  Eigen::VectorXd off(static_cast<Eigen::Index>(n - 1));
  for (std::size_t k = 1; k < n; ++k) off[static_cast<Eigen::Index>(k - 1)] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, off, Eigen::ComputeEigenvectors);
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double sqrt_pi = std::sqrt(std::numbers::pi);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    rule.nodes[i] = es.eigenvalues()[ii];
    const double v0 = es.eigenvectors()(0, ii);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  // symmetrize to remove eigen-solver noise
  for (std::size_t i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[n - 1 - i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadratureRule build_legendre(std::size_t n) {
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  const std::size_t m = (n + 1) / 2;
  const double nd = static_cast<double>(n);
  for (std::size_t i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        const double jd = static_cast<double>(j);
        p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
      }
      pp = nd * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15) {
        break;
      }
    }
    rule.nodes[i] = -z;
    rule.nodes[n - 1 - i] = z;
    rule.weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[n - 1 - i] = rule.weights[i];
  }
  return rule;
}

template <class Build>
const QuadratureRule& cached(std::map<std::size_t, QuadratureRule>& cache, std::mutex& mu,
                             std::size_t n, Build build) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, build(n)).first;
  }
  return it->second;
}

std::map<std::size_t, QuadratureRule> hermite_cache;
std::map<std::size_t, QuadratureRule> legendre_cache;
std::mutex hermite_mu;
std::mutex legendre_mu;

}  // namespace

QuadratureRule gauss_hermite(std::size_t n) {
  if (n < 2) {
    throw InvalidArgument("gauss_hermite: need at least 2 nodes");
  }
  return cached(hermite_cache, hermite_mu, n, build_hermite);
}

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n < 1) {
    throw InvalidArgument("gauss_legendre: need at least 1 node");
  }
  QuadratureRule rule = cached(legendre_cache, legendre_mu, n, build_legendre);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

double gauss_expectation(const std::function<double(double)>& f, double variance,
                         std::size_t n_nodes) {
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw InvalidArgument("gauss_expectation: variance must be positive");
  }
  const QuadratureRule rule = gauss_hermite(n_nodes);
  const double scale = std::sqrt(2.0 * variance);
  double sum = 0.0;
  for (std::size_t i = 0; i < n_nodes; ++i) {
    const double v = f(scale * rule.nodes[i]);
    if (!std::isfinite(v)) {
      throw NumericError("gauss_expectation: integrand not finite at node " +
                         std::to_string(scale * rule.nodes[i]));
    }
    sum += rule.weights[i] * v;
  }
  return sum / std::sqrt(std::numbers::pi);
}

}  // namespace qgx::stochastic
