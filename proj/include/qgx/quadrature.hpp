#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace qgx::stochastic {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Hermite rule for the weight exp(-x^2).
QuadratureRule gauss_hermite(std::size_t n);

/// Gauss-Legendre rule on [a, b].
QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// E[f(G)] for G ~ N(0, variance). Exact for polynomials of degree < 2n.
/// Throws NumericError when f is not finite at a node.
double gauss_expectation(const std::function<double(double)>& f, double variance,
                         std::size_t n_nodes);

}  // namespace qgx::stochastic
