#pragma once

#include <functional>
#include <vector>

namespace qgx::bsde {

struct Jump {
  double time;
  double size;
};

/// Finite-variation driver V: dV = density dt plus jumps at grid times.
/// A state-dependent density reads the current Brownian state x.
struct DriverV {
  std::function<double(double t, double x)> density;
  bool state_dependent = false;
  std::vector<Jump> jumps;

  bool empty() const noexcept { return !density && jumps.empty(); }

  /// V_t for a state-independent driver (V_0 = 0, right-continuous).
  double value(double t) const;
  /// sup_{[0,T]} |V_t| for a state-independent driver.
  double sup_norm(double T) const;
  /// Total variation on [t0, T]; state-dependent densities are bounded over
  /// the supplied state samples.
  double total_variation(double t0, double T, const std::vector<double>& states = {}) const;
};

}  // namespace qgx::bsde
