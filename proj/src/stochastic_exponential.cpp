#include "qgx/stochastic_exponential.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qgx/errors.hpp"

namespace qgx::stochastic {

namespace {

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  mean = s / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

double checked_beta(const AdaptedProcess& beta, const PathView& v, std::size_t i) {
  const double b = beta(v, i);
  if (!std::isfinite(b)) {
    throw NumericError("stochastic_exponential: beta not finite on path " +
                       std::to_string(v.path_id) + " at step " + std::to_string(i));
  }
  return b;
}

}  // namespace

void check_adapted(const AdaptedProcess& beta, const PathEnsemble& ensemble,
                   std::size_t n_sample_paths, std::size_t n_sample_steps) {
  const std::size_t n = ensemble.n_steps();
  const std::size_t np = std::min(n_sample_paths, ensemble.n_paths());
  const std::size_t ns = std::min(n_sample_steps, n);
  for (std::size_t k = 0; k < np; ++k) {
    const std::size_t p = k * ensemble.n_paths() / np;
    const PathView v = ensemble.path(p);
    for (std::size_t s = 0; s < ns; ++s) {
      const std::size_t i = s * n / ns;
      const double original = beta(v, i);
      // increments i, i+1, ... move positions strictly after t_i
      const std::vector<double> pos = perturbed_positions(v, i, 0xADA9ull + s);
      std::vector<double> inc(n);
      for (std::size_t j = 0; j < n; ++j) inc[j] = pos[j + 1] - pos[j];
      const PathView moved{v.grid, v.path_id, pos, inc};
      const double after = beta(moved, i);
      if (!(original == after) && !(std::isnan(original) && std::isnan(after))) {
        throw ContractViolation("stochastic_exponential: integrand is not adapted (path " +
                                std::to_string(p) + ", step " + std::to_string(i) + ")");
      }
    }
  }
}

StochasticExponentialPath stochastic_exponential(const AdaptedProcess& beta,
                                                 const PathEnsemble& ensemble) {
  check_adapted(beta, ensemble);
  StochasticExponentialPath out;
  out.n_paths = ensemble.n_paths();
  out.n_steps = ensemble.n_steps();
  const std::size_t n = out.n_steps;
  const double dt = ensemble.grid().dt();
  out.m.assign(out.n_paths * (n + 1), 0.0);
  out.qv.assign(out.n_paths * (n + 1), 0.0);
  out.exp.assign(out.n_paths * (n + 1), 1.0);
  std::vector<double> terminal(out.n_paths);
  for (std::size_t p = 0; p < out.n_paths; ++p) {
    const PathView v = ensemble.path(p);
    double m = 0.0;
    double q = 0.0;
    const std::size_t base = p * (n + 1);
    for (std::size_t i = 0; i < n; ++i) {
      const double b = checked_beta(beta, v, i);
      m += b * v.increments[i];
      q += b * b * dt;
      out.m[base + i + 1] = m;
      out.qv[base + i + 1] = q;
      out.exp[base + i + 1] = std::exp(m - 0.5 * q);
    }
    terminal[p] = out.exp[base + n];
  }
  mean_and_stderr(terminal, out.terminal_mean, out.terminal_stderr);
  return out;
}

TerminalExponential stochastic_exponential_terminal(const AdaptedProcess& beta,
                                                    const PathEnsemble& ensemble) {
  check_adapted(beta, ensemble);
  TerminalExponential out;
  const std::size_t n = ensemble.n_steps();
  const double dt = ensemble.grid().dt();
  out.weight.resize(ensemble.n_paths());
  out.energy.resize(ensemble.n_paths());
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    const PathView v = ensemble.path(p);
    double m = 0.0;
    double q = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double b = checked_beta(beta, v, i);
      m += b * v.increments[i];
      q += b * b * dt;
    }
    out.weight[p] = std::exp(m - 0.5 * q);
    out.energy[p] = q;
  }
  mean_and_stderr(out.weight, out.mean, out.stderr_);
  return out;
}

}  // namespace qgx::stochastic
