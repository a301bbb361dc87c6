#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "qgx/bsde_solver.hpp"
#include "qgx/paths.hpp"
#include "qgx/stopping_time.hpp"

namespace qgx::gexp {

using bsde::SolverOptions;
using bsde::TerminalCondition;
using bsde::ValueSurface;
using generators::Generator;
using stochastic::FiniteStoppingTime;
using stochastic::GridField;
using stochastic::PathEnsemble;
using stochastic::SpaceGrid;
using stochastic::TimeGrid;

/// Nodal values of a random variable measurable w.r.t. B at one time.
using StateValues = std::vector<double>;

/// E^g_{s,t} on a fixed pair of grids, with the conditional g-expectation of
/// one terminal cached. All evaluations reuse sub-grids of the base time grid,
/// so re-solving a piece of the cached problem reproduces it exactly.
class GExpectationOperator {
 public:
  GExpectationOperator(Generator gen, TerminalCondition terminal, TimeGrid tgrid, SpaceGrid xgrid,
                       SolverOptions options = {});

  const Generator& generator() const noexcept { return gen_; }
  const TerminalCondition& terminal() const noexcept { return terminal_; }
  const TimeGrid& tgrid() const noexcept { return tgrid_; }
  const SpaceGrid& xgrid() const noexcept { return xgrid_; }
  const SolverOptions& options() const noexcept { return options_; }
  double horizon() const noexcept { return tgrid_.t_end(); }

  /// The cached surface of E^g[xi | F_t].
  const ValueSurface& surface() const noexcept { return surface_; }
  /// E^g[xi | F_t] at the grid states.
  StateValues conditional(double t) const;
  /// u(s, x) read from the cached surface.
  double at(double s, double x) const { return surface_.y(s, x); }

  /// E^g_{s,t}[xi] for xi given at the grid states at time t.
  StateValues evaluate(double s, double t, const StateValues& xi) const;
  StateValues evaluate(double s, double t, const TerminalCondition& xi) const;
  /// The whole surface on [s, t]; an optional driver is passed to the solver.
  ValueSurface evaluate_surface(double s, double t, const StateValues& xi,
                                const bsde::DriverV* driver = nullptr) const;

  StateValues sample(const TerminalCondition& xi) const;

  nlohmann::json describe() const;

 private:
  Generator gen_;
  TerminalCondition terminal_;
  TimeGrid tgrid_;
  SpaceGrid xgrid_;
  SolverOptions options_;
  ValueSurface surface_;
};

/// Two-stage evaluation E_{r,s}[E_{s,t}[xi]]; the second stage restarts on a
/// space grid of about 3/4 the resolution from the interpolated first stage.
StateValues compose(const GExpectationOperator& op, double r, double s, double t,
                    const StateValues& xi);

/// E^g_{sigma,tau}[X_tau] per path by the backward recursion over tau's
/// value set. X is a field on the operator's grids; tau and sigma must be
/// defined on the ensemble grid, whose nodes must be operator time nodes.
/// Throws InvalidArgument naming the first path with sigma > tau.
std::vector<double> evaluate_at_stopping_times(const GExpectationOperator& op,
                                               const FiniteStoppingTime& sigma,
                                               const FiniteStoppingTime& tau, const GridField& X,
                                               const PathEnsemble& ensemble);

enum class Classification { Martingale, Submartingale, Supermartingale, Neither };
const char* to_string(Classification c);

struct GMartingaleVerdict {
  Classification classification = Classification::Neither;
  double min_gap = 0.0;  // min over pairs/states of E_{s,t}[X_t] - X_s
  double max_gap = 0.0;
  double worst_violation = 0.0;
  std::pair<double, double> worst_pair{0.0, 0.0};
  double tolerance = 0.0;
};

/// Dyadic pairs (iT/8, jT/8), i < j.
std::vector<std::pair<double, double>> dyadic_pairs(const TimeGrid& tgrid, int levels = 8);

GMartingaleVerdict classify(const GExpectationOperator& op, const GridField& X,
                            const std::vector<std::pair<double, double>>& pairs = {},
                            double relative_tolerance = 1e-6);

}  // namespace qgx::gexp
