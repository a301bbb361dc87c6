#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qgx/checkers.hpp"
#include "qgx/errors.hpp"
#include "qgx/quadrature.hpp"
#include "qgx/terminal_family.hpp"

namespace qgx::lab {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

json terminal_names(const std::vector<TerminalCondition>& terminals) {
  json out = json::array();
  for (const auto& t : terminals) out.push_back(t.description);
  return out;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

SpaceGrid GridSpec::space_grid(const std::vector<TerminalCondition>& terminals) const {
  const double half =
      half_width > 0.0 ? half_width : 6.0 * std::sqrt(T) + settling_width(terminals) + 0.01;
  return SpaceGrid::symmetric(half, n_points);
}

json GridSpec::to_json() const {
  return {{"T", T}, {"n_steps", n_steps}, {"n_points", n_points}, {"half_width", half_width}};
}

GridSpec GridSpec::refined() const {
  GridSpec g = *this;
  g.n_steps *= 2;
  g.n_points = 2 * (n_points - 1) + 1;
  return g;
}

std::vector<std::size_t> interior_states(const SpaceGrid& xg, double fraction) {
  const double lim = fraction * std::max(std::abs(xg.x_min()), std::abs(xg.x_max()));
  std::vector<std::size_t> out;
  for (std::size_t j = 1; j + 1 < xg.size(); ++j) {
    if (std::abs(xg.node(j)) <= lim) out.push_back(j);
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<double> representation_quotients(const Generator& gen, double t, double y, double z,
                                             const RepresentationOptions& opt) {
  if (!(opt.delta > 0.0)) throw InvalidArgument("representation: delta must be positive");
  const double r = opt.delta / (1.0 + std::abs(z));
  const double dx = r / static_cast<double>(opt.points_per_radius);
  std::vector<double> q;
  for (double eps : opt.eps_ladder) {
    if (!(eps > 0.0)) throw InvalidArgument("representation: eps must be positive");
    const TimeGrid tg(t, t + eps, opt.steps_per_eps);
    const ValueSurface s = bsde::solve_stopped(gen, tg, 0.0, r, {y, z}, dx);
    const std::size_t center = s.xgrid().size() / 2;
    q.push_back((s.u.at(0, center) - y) / eps);
  }
  return q;
}

CheckReport check_representation(const Generator& gen, double t, double y, double z,
                                 const RepresentationOptions& opt) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "representation";
  rep.relation =
      "g(t,y,z) = lim_{eps->0} (E^g_{t,(t+eps)^tau}[y + z(B_{(t+eps)^tau} - B_t)] - y) / eps, "
      "tau = exit time of the ball of radius delta/(1+|z|)";
  rep.inputs = {{"generator", gen.spec()}, {"t", t},         {"y", y},
                {"z", z},                  {"delta", opt.delta}, {"eps_ladder", opt.eps_ladder},
                {"steps_per_eps", opt.steps_per_eps}, {"points_per_radius", opt.points_per_radius}};
  const double target = gen(t, y, z);
  const auto q = representation_quotients(gen, t, y, z, opt);
  std::vector<double> err;
  for (double v : q) err.push_back(std::abs(v - target));
  const bool exact = std::all_of(err.begin(), err.end(), [](double e) { return e <= 1e-8; });
  double limit = q.back();
  double order = 0.0;
  std::string method = "finest";
  if (exact) {
    order = std::numeric_limits<double>::infinity();
    method = "exact";
  } else if (q.size() >= 3) {
    try {
      const auto ex = bsde::extrapolate(q, opt.eps_ladder[0] / opt.eps_ladder[1]);
      limit = ex.value;
      order = ex.order;
      method = "richardson";
    } catch (const NoConvergence&) {
      method = "finest (ladder not monotone)";
    }
  }
  // slack of the monotone-ladder assertion: smallest decrease, 1e-12 absorbs rounding
  double mono = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < err.size(); ++k) mono = std::min(mono, err[k - 1] - err[k] + 1e-12);
  const double limit_err = std::abs(limit - target);
  const double tol = std::max(opt.relative_tolerance * std::abs(target), opt.absolute_floor);
  rep.observed = {{"g", target},
                  {"quotients", q},
                  {"errors", err},
                  {"limit", limit},
                  {"limit_error", limit_err},
                  {"limit_tolerance", tol},
                  {"method", method},
                  {"observed_order", std::isfinite(order) ? json(order) : json("inf")},
                  {"error_ladder_monotone", mono >= 0.0}};
  rep.margin = std::min(tol - limit_err, mono);
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

std::vector<Probe> default_probes() {
  std::vector<Probe> p;
  for (double z : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) p.push_back({0.0, 0.0, z});
  return p;
}

CheckReport check_converse_comparison(const Generator& g1, const Generator& g2,
                                      const std::vector<Probe>& probes,
                                      const std::vector<TerminalCondition>& terminals,
                                      const GridSpec& grid) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "converse_comparison";
  rep.relation =
      "E^{g1}[xi|F_t] <= E^{g2}[xi|F_t] for all xi  implies  g1 <= g2 (checked on probe "
      "quotients)";
  rep.inputs = {{"g1", g1.spec()},
                {"g2", g2.spec()},
                {"terminals", terminal_names(terminals)},
                {"grid", grid.to_json()}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid(terminals);
  const auto states = interior_states(xg);
  const std::size_t rows[] = {0, tg.n_steps() / 2};
  double worst = -std::numeric_limits<double>::infinity();
  json witness;
  for (const auto& xi : terminals) {
    const ValueSurface s1 = bsde::solve(g1, xi, tg, xg);
    const ValueSurface s2 = bsde::solve(g2, xi, tg, xg);
    for (std::size_t i : rows) {
      for (std::size_t j : states) {
        const double d = s1.u.at(i, j) - s2.u.at(i, j);
        if (d > worst) {
          worst = d;
          witness = {{"terminal", xi.description},
                     {"t", tg.node(i)},
                     {"x", xg.node(j)},
                     {"E_g1", s1.u.at(i, j)},
                     {"E_g2", s2.u.at(i, j)}};
        }
      }
    }
  }
  const double hyp_tol = 1e-8;
  const bool hypothesis = worst <= hyp_tol;

  RepresentationOptions ro;
  ro.eps_ladder = {0.0125};
  const double q_tol = 1e-6;
  double min_gap = std::numeric_limits<double>::infinity();
  json probe_rows = json::array();
  json discriminating = json::array();
  for (const auto& p : probes) {
    const double q1 = representation_quotients(g1, p.t, p.y, p.z, ro)[0];
    const double q2 = representation_quotients(g2, p.t, p.y, p.z, ro)[0];
    min_gap = std::min(min_gap, q2 - q1);
    json row = {{"t", p.t}, {"y", p.y}, {"z", p.z}, {"q1", q1}, {"q2", q2}};
    probe_rows.push_back(row);
    if (q1 > q2 + q_tol) discriminating.push_back(row);
  }
  rep.observed = {{"stage1_max_gap", worst},
                  {"stage1_holds", hypothesis},
                  {"stage1_witness", witness},
                  {"probes", probe_rows},
                  {"discriminating_probes", discriminating}};
  if (hypothesis) {
    rep.margin = min_gap;
    rep.tolerance = q_tol;
    rep.status = Status::Pass;
    rep.settle();
  } else {
    rep.margin = 0.0;
    rep.tolerance = 0.0;
    rep.status = Status::HypothesisNotSatisfied;
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

CheckReport check_translation(const Generator& gen, const std::vector<double>& constants,
                              const std::vector<TerminalCondition>& terminals_in,
                              const GridSpec& grid, double tolerance) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "translation";
  rep.relation = "g independent of y  iff  E^g[xi + c | F_t] = E^g[xi | F_t] + c";
  auto terminals = terminals_in;
  terminals.push_back(TerminalCondition::constant(0.0));
  rep.inputs = {{"generator", gen.spec()},
                {"constants", constants},
                {"terminals", terminal_names(terminals)},
                {"grid", grid.to_json()},
                {"tolerance", tolerance}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid(terminals);
  const auto states = interior_states(xg);
  double max_dev = 0.0;
  json witness;
  for (const auto& xi : terminals) {
    const ValueSurface base = bsde::solve(gen, xi, tg, xg);
    for (double c : constants) {
      const auto phi = xi.phi;
      const ValueSurface shifted = bsde::solve(
          gen, TerminalCondition::function([phi, c](double x) { return phi(x) + c; }, ""), tg, xg);
      for (std::size_t j : states) {
        const double dev = std::abs(shifted.u.at(0, j) - base.u.at(0, j) - c);
        if (dev > max_dev) {
          max_dev = dev;
          witness = {{"terminal", xi.description}, {"c", c}, {"x", xg.node(j)}, {"deviation", dev}};
        }
      }
    }
  }
  const bool flag = gen.flags().y_independent;
  rep.observed = {{"y_independent_flag", flag},
                  {"max_deviation", max_dev},
                  {"witness", witness}};
  rep.margin = flag ? tolerance - max_dev : max_dev - 10.0 * tolerance;
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

ConvexFunction convex_function(const std::string& name) {
  if (name == "abs") {
    return {name, [](double x) { return std::abs(x); },
            [](double x) { return x > 0.0 ? 1.0 : -1.0; },
            [](double x) { return x < 0.0 ? -1.0 : 1.0; }};
  }
  if (name == "positive_part") {
    return {name, [](double x) { return std::max(x, 0.0); },
            [](double x) { return x > 0.0 ? 1.0 : 0.0; },
            [](double x) { return x < 0.0 ? 0.0 : 1.0; }};
  }
  if (name == "identity") {
    return {name, [](double x) { return x; }, [](double) { return 1.0; },
            [](double) { return 1.0; }};
  }
  if (name == "half_softplus") {
    auto d = [](double x) { return 0.5 / (1.0 + std::exp(-x)); };
    return {name, [](double x) { return 0.5 * (std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)))); },
            d, d};
  }
  throw InvalidArgument("unknown convex function '" + name + "'");
}

double jensen_selector(const ConvexFunction& F, double x) {
  const double l = F.left(x);
  return l <= 0.0 ? l : F.right(x);
}

bool jensen_condition(const ConvexFunction& F, double x) {
  return F.left(x) <= 0.0 || F.right(x) >= 1.0;
}

CheckReport check_jensen(const Generator& gen, const ConvexFunction& F,
                         const std::vector<TerminalCondition>& terminals, const GridSpec& grid,
                         double tolerance) {
  if (!F.f || !F.left || !F.right) {
    throw InvalidArgument("check_jensen: F needs its value and both one-sided derivatives");
  }
  if (grid.n_steps % 8 != 0) {
    throw InvalidArgument("check_jensen: n_steps must be a multiple of 8 (times kT/8 are tested)");
  }
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "jensen";
  rep.relation =
      "F(E^g[xi|F_t]) <= E^g[F(xi)|F_t] wherever dF(E^g[xi|F_t]) meets the complement of (0,1)";
  rep.inputs = {{"generator", gen.spec()},
                {"F", F.name},
                {"terminals", terminal_names(terminals)},
                {"grid", grid.to_json()},
                {"tolerance", tolerance}};
  const auto& fl = gen.flags();
  if (!(fl.convex_in_z && fl.y_independent && fl.satisfies_g0)) {
    rep.status = Status::HypothesisNotSatisfied;
    rep.observed = {{"reason", "generator must be convex in z, y-independent and vanish at z=0"}};
    rep.runtime_seconds = seconds_since(t0);
    return rep;
  }
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid(terminals);
  const auto states = interior_states(xg);
  double margin = std::numeric_limits<double>::infinity();
  std::size_t asserted = 0;
  std::size_t not_met = 0;
  json worst;
  json first_not_met;
  for (const auto& xi : terminals) {
    const ValueSurface base = bsde::solve(gen, xi, tg, xg);
    const auto phi = xi.phi;
    const auto f = F.f;
    const ValueSurface fs = bsde::solve(
        gen, TerminalCondition::function([phi, f](double x) { return f(phi(x)); }, ""), tg, xg);
    for (int k = 0; k < 8; ++k) {
      const std::size_t i = tg.index_of(grid.T * k / 8.0);
      for (std::size_t j : states) {
        const double m = base.u.at(i, j);
        if (!jensen_condition(F, m)) {
          if (not_met == 0) {
            first_not_met = {{"terminal", xi.description}, {"t", tg.node(i)}, {"x", xg.node(j)},
                             {"value", m}, {"F_left", F.left(m)}, {"F_right", F.right(m)}};
          }
          ++not_met;
          continue;
        }
        ++asserted;
        const double gap = fs.u.at(i, j) - F.f(m);
        if (gap < margin) {
          margin = gap;
          worst = {{"terminal", xi.description}, {"t", tg.node(i)}, {"x", xg.node(j)},
                   {"lhs", F.f(m)}, {"rhs", fs.u.at(i, j)}, {"beta", jensen_selector(F, m)}};
        }
      }
    }
  }
  rep.observed = {{"asserted_states", asserted},
                  {"condition_not_met", not_met},
                  {"first_condition_not_met", first_not_met},
                  {"worst", worst}};
  if (asserted == 0) {
    rep.status = Status::Informational;
    rep.margin = 0.0;
  } else {
    rep.margin = margin;
    rep.tolerance = tolerance;
    rep.status = Status::Pass;
    rep.settle();
  }
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

CheckReport check_stability(const std::vector<Generator>& gens,
                            const std::vector<TerminalCondition>& terminals,
                            const Generator& limit_gen, const TerminalCondition& limit_terminal,
                            const GridSpec& grid, double tolerance,
                            const std::vector<double>& error_bounds) {
  if (gens.size() < 3 || gens.size() != terminals.size()) {
    throw InvalidArgument("check_stability: need >= 3 rungs with one terminal each");
  }
  if (!error_bounds.empty() && error_bounds.size() != gens.size()) {
    throw InvalidArgument("check_stability: one error bound per rung");
  }
  for (const auto& g : gens) {
    bool same = g.k() == limit_gen.k();
    for (double r : {0.0, 0.5, 1.0, 2.0, 5.0, 10.0}) same = same && g.ell(r) == limit_gen.ell(r);
    if (!same) throw InvalidArgument("check_stability: ladder does not share k and ell");
  }
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "stability";
  rep.relation = "g_n -> g locally uniformly and xi_n -> xi imply sup |Y^n - Y| -> 0";
  json gj = json::array();
  for (const auto& g : gens) gj.push_back(g.spec());
  std::vector<TerminalCondition> all = terminals;
  all.push_back(limit_terminal);
  rep.inputs = {{"generators", gj},
                {"terminals", terminal_names(terminals)},
                {"limit_generator", limit_gen.spec()},
                {"limit_terminal", limit_terminal.description},
                {"grid", grid.to_json()},
                {"tolerance", tolerance}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid(all);
  const auto states = interior_states(xg);
  const ValueSurface ref = bsde::solve(limit_gen, limit_terminal, tg, xg);
  std::vector<double> errs;
  for (std::size_t n = 0; n < gens.size(); ++n) {
    const ValueSurface s = bsde::solve(gens[n], terminals[n], tg, xg);
    double e = 0.0;
    for (std::size_t i = 0; i <= tg.n_steps(); ++i) {
      for (std::size_t j : states) e = std::max(e, std::abs(s.u.at(i, j) - ref.u.at(i, j)));
    }
    errs.push_back(e);
  }
  double mono = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k < errs.size(); ++k) mono = std::min(mono, errs[k - 1] - errs[k] + 1e-12);
  double bound_slack = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < error_bounds.size(); ++k) {
    bound_slack = std::min(bound_slack, error_bounds[k] - errs[k]);
  }
  rep.observed = {{"sup_errors", errs}, {"monotone", mono >= 0.0}, {"final_error", errs.back()}};
  if (!error_bounds.empty()) rep.observed["error_bounds"] = error_bounds;
  rep.margin = std::min({tolerance - errs.back(), mono, bound_slack});
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

CheckReport check_oracle(const std::string& kind, const GridSpec& grid) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "oracle";
  rep.inputs = {{"kind", kind}, {"grid", grid.to_json()}};
  const double T = grid.T;
  const double sd = std::sqrt(T);
  const TimeGrid tg = grid.time_grid();
  if (kind == "heat") {
    rep.relation = "zero generator: u(0,x) = E[tanh(x + B_T)]";
    const auto phi = TerminalCondition::expression("tanh(x)");
    const SpaceGrid xg = grid.space_grid({phi});
    const ValueSurface s = bsde::solve(generators::zero(), phi, tg, xg);
    double worst = 0.0;
    json rows = json::array();
    for (int k = -5; k <= 5; ++k) {
      const double x = 0.5 * k;
      const double o = stochastic::gauss_expectation(
          [x, sd](double g) { return std::tanh(x + sd * g); }, 1.0, 128);
      const double e = std::abs(s.y(0.0, x) - o);
      worst = std::max(worst, e);
      rows.push_back({{"x", x}, {"solver", s.y(0.0, x)}, {"oracle", o}});
    }
    rep.observed = {{"states", rows}, {"max_error", worst}};
    rep.margin = -worst;
    rep.tolerance = 1e-4;
  } else if (kind == "girsanov") {
    rep.relation = "linear(0.3): u(0,0) = E[tanh(B_T + 0.3 T)]";
    const auto phi = TerminalCondition::expression("tanh(x)");
    const SpaceGrid xg = grid.space_grid({phi});
    const ValueSurface s = bsde::solve(generators::linear(0.3), phi, tg, xg);
    const double o = stochastic::gauss_expectation(
        [sd, T](double g) { return std::tanh(sd * g + 0.3 * T); }, 1.0, 128);
    const double e = std::abs(s.y(0.0, 0.0) - o);
    rep.observed = {{"solver", s.y(0.0, 0.0)}, {"oracle", o}, {"error", e}};
    rep.margin = -e;
    rep.tolerance = 1e-3;
  } else if (kind == "entropic") {
    rep.relation = "entropic(1), clip(x,-2,2): u(0,0) = log E[exp(clip(B_T))]; error shrinks "
                   "by >= 1.5 under refinement";
    const auto phi = TerminalCondition::expression("max(-2,min(x,2))");
    // closed form of E[exp(clip(sd G, -2, 2))]
    const double mgf = std::exp(-2.0) * normal_cdf(-2.0 / sd) +
                       std::exp(0.5 * T) * (normal_cdf(2.0 / sd - sd) - normal_cdf(-2.0 / sd - sd)) +
                       std::exp(2.0) * normal_cdf(-2.0 / sd);
    const double o = std::log(mgf);
    const SpaceGrid xg = grid.space_grid({phi});
    const ValueSurface s = bsde::solve(generators::entropic(1.0), phi, tg, xg);
    const GridSpec fine = grid.refined();
    const ValueSurface sf =
        bsde::solve(generators::entropic(1.0), phi, fine.time_grid(), fine.space_grid({phi}));
    const double e = std::abs(s.y(0.0, 0.0) - o);
    const double ef = std::abs(sf.y(0.0, 0.0) - o);
    const double factor = ef > 0.0 ? e / ef : std::numeric_limits<double>::infinity();
    rep.observed = {{"solver", s.y(0.0, 0.0)},
                    {"solver_refined", sf.y(0.0, 0.0)},
                    {"oracle", o},
                    {"error", e},
                    {"error_refined", ef},
                    {"refinement_factor", std::isfinite(factor) ? json(factor) : json("inf")}};
    rep.margin = std::min(2e-3 - e, std::isfinite(factor) ? (factor - 1.5) * e : 0.0);
    rep.tolerance = 0.0;
  } else {
    throw InvalidArgument("unknown oracle '" + kind + "'");
  }
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

}  // namespace qgx::lab
