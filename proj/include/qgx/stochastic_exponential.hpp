#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qgx/paths.hpp"

namespace qgx::stochastic {

/// beta(path, i) is the integrand on (t_i, t_{i+1}]; it may read the path only
/// through step i.
using AdaptedProcess = std::function<double(const PathView&, std::size_t)>;

struct StochasticExponentialPath {
  std::size_t n_paths = 0;
  std::size_t n_steps = 0;
  std::vector<double> m;    // M_{t_i}, row-major by path
  std::vector<double> qv;   // <M>_{t_i}
  std::vector<double> exp;  // E(M)_{t_i}
  double terminal_mean = 0.0;
  double terminal_stderr = 0.0;

  double value(std::size_t p, std::size_t i) const { return exp[p * (n_steps + 1) + i]; }
  double terminal(std::size_t p) const { return value(p, n_steps); }
};

/// Terminal-only variant for large ensembles.
struct TerminalExponential {
  std::vector<double> weight;  // E(M)_T per path
  std::vector<double> energy;  // int beta^2 ds per path
  double mean = 0.0;
  double stderr_ = 0.0;
};

/// M = sum beta_i (B_{i+1} - B_i), <M> = sum beta_i^2 dt, E(M) = exp(M - <M>/2).
/// Throws ContractViolation when beta reacts to increments after its step.
StochasticExponentialPath stochastic_exponential(const AdaptedProcess& beta,
                                                 const PathEnsemble& ensemble);

TerminalExponential stochastic_exponential_terminal(const AdaptedProcess& beta,
                                                    const PathEnsemble& ensemble);

/// Perturbation probe: for a few sample paths and steps, redraw the increments
/// from step i on and require beta(path, i) to be unchanged.
void check_adapted(const AdaptedProcess& beta, const PathEnsemble& ensemble,
                   std::size_t n_sample_paths = 4, std::size_t n_sample_steps = 8);

}  // namespace qgx::stochastic
