#pragma once

#include <cmath>
#include <functional>

// Reference values computed without the library's quadrature.
namespace oracle {

// E[f(m + s G)], G ~ N(0,1), by the trapezoid rule on [-12, 12]; the rule is
// spectrally accurate for smooth integrands with Gaussian decay.
inline double normal_mean(const std::function<double(double)>& f, double m = 0.0, double s = 1.0) {
  const int n = 24000;
  const double h = 24.0 / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double y = -12.0 + h * i;
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    acc += w * f(m + s * y) * std::exp(-0.5 * y * y);
  }
  return acc * h / std::sqrt(2.0 * M_PI);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// log E[exp(gamma clip(G, -c, c))] / gamma for G ~ N(0, T).
inline double entropic_clip(double gamma, double c, double T) {
  const double s = std::sqrt(T);
  const double lo = std::exp(-gamma * c) * normal_cdf(-c / s);
  const double hi = std::exp(gamma * c) * normal_cdf(-c / s);
  const double mid = std::exp(0.5 * gamma * gamma * T) *
                     (normal_cdf(c / s - gamma * s) - normal_cdf(-c / s - gamma * s));
  return std::log(lo + hi + mid) / gamma;
}

// E[tau ^ eps] for tau the exit time from (-r, r) of Brownian motion with
// drift a started at 0, from the sine series of the killed transition density.
inline double mean_stopped_exit(double r, double eps, double a = 0.0) {
  const double L = 2.0 * r;
  double acc = 0.0;
  for (int n = 1; n < 800; ++n) {
    const double k = n * M_PI / L;
    const double lam = 0.5 * k * k + 0.5 * a * a;
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    const double integral = std::exp(-a * r) * k * (1.0 - sign * std::exp(a * L)) / (a * a + k * k);
    const double coef = (2.0 / L) * std::sin(0.5 * n * M_PI) * integral;
    acc += coef * (1.0 - std::exp(-lam * eps)) / lam;
  }
  return acc;
}

}  // namespace oracle
