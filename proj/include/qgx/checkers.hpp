#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "qgx/bsde_solver.hpp"
#include "qgx/check_report.hpp"
#include "qgx/g_expectation.hpp"
#include "qgx/stochastic_exponential.hpp"

namespace qgx::lab {

using bsde::TerminalCondition;
using bsde::ValueSurface;
using generators::Generator;
using gexp::GExpectationOperator;
using gexp::StateValues;
using stochastic::FiniteStoppingTime;
using stochastic::GridField;
using stochastic::PathEnsemble;
using stochastic::SpaceGrid;
using stochastic::TimeGrid;

/// Grid choice shared by the checkers. half_width <= 0 means
/// 6 sqrt(T) + settling width of the terminals involved.
struct GridSpec {
  double T = 1.0;
  std::size_t n_steps = 2000;
  std::size_t n_points = 801;
  double half_width = 0.0;

  TimeGrid time_grid() const { return TimeGrid(0.0, T, n_steps); }
  SpaceGrid space_grid(const std::vector<TerminalCondition>& terminals) const;
  nlohmann::json to_json() const;
  GridSpec refined() const;  // twice the steps, twice the spacing resolution
};

/// States used for assertions: |x| <= fraction * half width (the rows near
/// the truncation boundary carry boundary error, not theorem content).
std::vector<std::size_t> interior_states(const SpaceGrid& xg, double fraction = 0.6);

// ---- representation of the generator -------------------------------------

struct RepresentationOptions {
  double delta = 8.0;
  std::vector<double> eps_ladder = {0.1, 0.05, 0.025, 0.0125};
  std::size_t steps_per_eps = 200;
  std::size_t points_per_radius = 64;
  double relative_tolerance = 0.05;
  double absolute_floor = 0.01;
};

/// Quotients (E^g_{t,(t+eps)^tau}[y + z (B - B_t)] - y) / eps for each eps.
std::vector<double> representation_quotients(const Generator& gen, double t, double y, double z,
                                             const RepresentationOptions& opt);

CheckReport check_representation(const Generator& gen, double t, double y, double z,
                                 const RepresentationOptions& opt = {});

// ---- converse comparison --------------------------------------------------

struct Probe {
  double t;
  double y;
  double z;
};
std::vector<Probe> default_probes();

CheckReport check_converse_comparison(const Generator& g1, const Generator& g2,
                                      const std::vector<Probe>& probes,
                                      const std::vector<TerminalCondition>& terminals,
                                      const GridSpec& grid);

// ---- translation characterization -----------------------------------------

CheckReport check_translation(const Generator& gen, const std::vector<double>& constants,
                              const std::vector<TerminalCondition>& terminals,
                              const GridSpec& grid, double tolerance = 1e-6);

// ---- Jensen ---------------------------------------------------------------

/// Convex F with one-sided derivatives.
struct ConvexFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> left;   // F'_-
  std::function<double(double)> right;  // F'_+
};
/// abs, positive_part, identity, half_softplus. Throws on unknown names.
ConvexFunction convex_function(const std::string& name);

/// beta(x) = F'_-(x) if F'_-(x) <= 0 else F'_+(x).
double jensen_selector(const ConvexFunction& F, double x);
/// dF(x) meets the complement of (0, 1).
bool jensen_condition(const ConvexFunction& F, double x);

CheckReport check_jensen(const Generator& gen, const ConvexFunction& F,
                         const std::vector<TerminalCondition>& terminals, const GridSpec& grid,
                         double tolerance = 1e-6);

// ---- Doob-Meyer -----------------------------------------------------------

struct DoobMeyerResult {
  CheckReport report;
  std::vector<double> coarse_times;
  std::vector<StateValues> increments;    // A_{k+1} - A_k as a function of B_{t_k}
  std::vector<std::vector<double>> paths;  // A along ensemble paths at coarse times
  double reconstruction_error = 0.0;
  bool reflected = false;
};

/// X lives on op's grids; coarse steps split [0,T] evenly on op nodes.
DoobMeyerResult doob_meyer_decompose(const GExpectationOperator& op, const GridField& X,
                                     std::size_t coarse_steps, const PathEnsemble* ensemble,
                                     double reconstruction_tolerance = 5e-3);

// ---- optional sampling ----------------------------------------------------

CheckReport check_optional_sampling(const GExpectationOperator& op, const GridField& X,
                                    gexp::Classification expected,
                                    const FiniteStoppingTime& sigma,
                                    const FiniteStoppingTime& tau, const PathEnsemble& ensemble,
                                    double tolerance = 5e-3);

// ---- upcrossing -----------------------------------------------------------

struct UpcrossReport {
  CheckReport report;
  double a = 0.0;
  double b = 0.0;
  std::vector<double> partition;
  std::vector<int> counts;
  std::vector<double> weights;
  double weighted_mean = 0.0;
  double weighted_stderr = 0.0;
  double plain_mean = 0.0;
  double plain_stderr = 0.0;
  double doob_rhs = 0.0;  // E[(X~_T - a)^+] / (b - a) under P
  double bound = 0.0;
  double weight_mean = 0.0;
  double weight_stderr = 0.0;
  double beta_energy = 0.0;
  double energy_bound = 0.0;
};

/// X is a g-submartingale field on op's grids; the partition times must be
/// ensemble nodes, and ensemble nodes must be op nodes.
UpcrossReport check_upcrossing(const GExpectationOperator& op, const GridField& X, double a,
                               double b, const std::vector<double>& partition,
                               const PathEnsemble& ensemble);

/// Upcrossings of [a, b] by a finite sequence.
int count_upcrossings(const std::vector<double>& values, double a, double b);

// ---- stability ------------------------------------------------------------

CheckReport check_stability(const std::vector<Generator>& gens,
                            const std::vector<TerminalCondition>& terminals,
                            const Generator& limit_gen, const TerminalCondition& limit_terminal,
                            const GridSpec& grid, double tolerance = 1e-3,
                            const std::vector<double>& error_bounds = {});

// ---- structural checks ----------------------------------------------------

struct AxiomOptions {
  double time_consistency_tolerance = 5e-3;
  bool check_refinement = true;
  double zero_one_tolerance = 5e-3;
  std::size_t zero_one_paths = 2000;
  std::uint64_t seed = 11;
};

CheckReport check_axioms(const Generator& gen, const std::vector<TerminalCondition>& terminals,
                         const GridSpec& grid, const AxiomOptions& opt = {});

CheckReport check_strict_comparison(const Generator& gen, const TerminalCondition& phi1,
                                    const TerminalCondition& phi2, const GridSpec& grid,
                                    double required_gap = 1e-4);

CheckReport check_determinism(const Generator& gen, const TerminalCondition& phi, double s,
                              double t, const GridSpec& grid, double tolerance = 1e-6);

struct BmoCheckOptions {
  std::size_t ensemble_steps = 16;
  std::size_t ensemble_paths = 32;
  std::size_t n_subpaths = 10000;
  std::uint64_t seed = 5;
};

CheckReport check_bmo(const Generator& gen, const TerminalCondition& phi, const GridSpec& grid,
                      const BmoCheckOptions& opt = {});

/// heat | girsanov | entropic closed-form oracles.
CheckReport check_oracle(const std::string& kind, const GridSpec& grid);

}  // namespace qgx::lab
