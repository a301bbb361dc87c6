#include "qgx/driver.hpp"

#include <algorithm>
#include <cmath>

#include "qgx/errors.hpp"
#include "qgx/quadrature.hpp"

namespace qgx::bsde {

namespace {

constexpr int kPanels = 64;

template <class F>
double integrate(F f, double a, double b) {
  if (!(b > a)) return 0.0;
  static const auto rule = stochastic::gauss_legendre(8, 0.0, 1.0);
  const double h = (b - a) / kPanels;
  double acc = 0.0;
  for (int p = 0; p < kPanels; ++p) {
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      acc += rule.weights[i] * h * f(a + (p + rule.nodes[i]) * h);
    }
  }
  return acc;
}

}  // namespace

double DriverV::value(double t) const {
  if (state_dependent) {
    throw InvalidArgument("DriverV::value: the driver depends on the state");
  }
  double v = 0.0;
  if (density) {
    v += integrate([this](double s) { return density(s, 0.0); }, 0.0, t);
  }
  for (const Jump& j : jumps) {
    if (j.time <= t) v += j.size;
  }
  return v;
}

double DriverV::sup_norm(double T) const {
  double m = 0.0;
  for (int i = 0; i <= 256; ++i) m = std::max(m, std::abs(value(T * i / 256.0)));
  for (const Jump& j : jumps) m = std::max(m, std::abs(value(j.time)));
  return m;
}

double DriverV::total_variation(double t0, double T, const std::vector<double>& states) const {
  double tv = 0.0;
  if (density) {
    if (state_dependent) {
      const std::vector<double> xs = states.empty() ? std::vector<double>{0.0} : states;
      tv += integrate(
          [&](double s) {
            double m = 0.0;
            for (double x : xs) m = std::max(m, std::abs(density(s, x)));
            return m;
          },
          t0, T);
    } else {
      tv += integrate([this](double s) { return std::abs(density(s, 0.0)); }, t0, T);
    }
  }
  for (const Jump& j : jumps) {
    if (j.time > t0 && j.time <= T) tv += std::abs(j.size);
  }
  return tv;
}

}  // namespace qgx::bsde
