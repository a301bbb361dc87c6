#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgx/driver.hpp"
#include "qgx/generators.hpp"
#include "qgx/grid.hpp"

namespace qgx::bsde {

using generators::Generator;
using stochastic::GridField;
using stochastic::SpaceGrid;
using stochastic::TimeGrid;

/// Bounded terminal function phi(x).
struct TerminalCondition {
  std::function<double(double)> phi;
  double bound = std::numeric_limits<double>::quiet_NaN();  // NaN: estimate on the grid
  std::string description;

  static TerminalCondition expression(const std::string& text);
  static TerminalCondition constant(double c);
  static TerminalCondition function(std::function<double(double)> f, std::string description);
};

struct SolveMetadata {
  std::string scheme;
  std::size_t total_iterations = 0;
  std::size_t max_step_iterations = 0;
  double max_residual = 0.0;
  std::size_t damped_steps = 0;
  bool z_clamped = false;   // the Z cap was hit: result not certified
  double a_priori_bound = 0.0;
  double sup_u = 0.0;
  bool certified() const noexcept { return !z_clamped; }
};

struct ValueSurface {
  GridField u;
  GridField v;
  SolveMetadata meta;

  const TimeGrid& tgrid() const noexcept { return u.tgrid(); }
  const SpaceGrid& xgrid() const noexcept { return u.xgrid(); }
  double y(double t, double x) const { return u.interpolate(t, x); }
  double z(double t, double x) const { return v.interpolate(t, x); }
};

struct SolverOptions {
  double z_cap = 50.0;
  double tolerance = 1e-10;
  std::size_t max_iterations = 50;
  double damping = 1.0;           // first relaxation factor tried
  double fallback_damping = 0.5;  // used once the residual stops shrinking
  double bound_slack = 0.05;
  bool enforce_bound = true;
};

/// Backward Euler with implicit diffusion for
///   u_t + u_xx/2 + g(t,u,u_x) + density = 0,  u(T) = phi,
/// natural (u_xx = 0) boundary rows and jumps u <- u + dV at jump nodes.
ValueSurface solve(const Generator& gen, const TerminalCondition& terminal,
                   const TimeGrid& tgrid, const SpaceGrid& xgrid,
                   const DriverV* driver = nullptr, const SolverOptions& options = {});

/// Same scheme from terminal nodal values on xgrid.
ValueSurface solve_values(const Generator& gen, std::vector<double> terminal,
                          const TimeGrid& tgrid, const SpaceGrid& xgrid,
                          const DriverV* driver = nullptr, const SolverOptions& options = {},
                          double terminal_bound = std::numeric_limits<double>::quiet_NaN());

struct AffineData {
  double y;
  double z;
};

/// Exit-time solve on [t, t+eps] x [x_c - r, x_c + r] with Dirichlet data
/// y + z (x - x_c) on the lateral boundary and at the terminal time. The
/// surface is in local coordinates x - x_c. Throws GridTooCoarse if r < 4 dx.
ValueSurface solve_stopped(const Generator& gen, const TimeGrid& tgrid, double x_c, double r,
                           AffineData data, double dx, const SolverOptions& options = {});

/// Half width 6 sqrt(T) + W, W the largest |x| where phi still differs from
/// its far-field value by more than 1e-8 (searched on [-50, 50]).
SpaceGrid default_space_grid(const std::function<double(double)>& phi, double T,
                             std::size_t n_points = 801);

struct Extrapolation {
  double value = 0.0;
  double order = 0.0;  // +inf when the ladder is exact
  double finest = 0.0;
  std::vector<double> levels;
};

/// Richardson extrapolation of a ladder refined by `ratio` per level.
/// Throws NoConvergence when successive differences are not monotone.
Extrapolation extrapolate(const std::vector<double>& levels, double ratio = 2.0);

/// Evaluates problem(level) for level = 0..n_levels-1 and extrapolates.
Extrapolation refine_and_extrapolate(const std::function<double(int)>& problem, int n_levels,
                                     double ratio = 2.0);

}  // namespace qgx::bsde
