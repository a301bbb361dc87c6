#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qgx/bmo.hpp"
#include "qgx/checkers.hpp"
#include "qgx/errors.hpp"

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

TerminalCondition shifted(const TerminalCondition& xi, std::function<double(double)> add,
                          std::string label) {
  auto phi = xi.phi;
  return TerminalCondition::function(
      [phi, add = std::move(add)](double x) { return phi(x) + add(x); },
      xi.description + label);
}

// One assertion of a multi-part check: slack against its own tolerance.
struct Part {
  Part(std::string n, double tol, bool app = true)
      : name(std::move(n)), tolerance(tol), applicable(app) {}

  std::string name;
  double value = 0.0;  // observed deviation; the assertion is value <= tolerance
  double tolerance;
  bool applicable;
  json witness;

  double slack() const { return tolerance - value; }
};

json part_json(const Part& p) {
  json j = {{"applicable", p.applicable}};
  if (p.applicable) {
    j["value"] = p.value;
    j["tolerance"] = p.tolerance;
    j["pass"] = p.value <= p.tolerance;
    if (!p.witness.is_null()) j["witness"] = p.witness;
  }
  return j;
}

double max_interior_diff(const StateValues& a, const StateValues& b,
                         const std::vector<std::size_t>& states, std::size_t* at = nullptr) {
  double m = 0.0;
  for (std::size_t j : states) {
    const double d = std::abs(a[j] - b[j]);
    if (d > m) {
      m = d;
      if (at != nullptr) *at = j;
    }
  }
  return m;
}

double time_consistency_error(const Generator& gen, const std::vector<TerminalCondition>& terminals,
                              const GridSpec& grid, json& witness) {
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid(terminals);
  const auto states = interior_states(xg);
  double worst = 0.0;
  for (const auto& xi : terminals) {
    const GExpectationOperator op(gen, xi, tg, xg);
    const StateValues direct = op.conditional(tg.t0());
    const StateValues two = gexp::compose(op, tg.t0(), 0.5 * grid.T, grid.T, op.sample(xi));
    std::size_t at = 0;
    const double e = max_interior_diff(direct, two, states, &at);
    if (e > worst) {
      worst = e;
      witness = {{"terminal", xi.description}, {"x", xg.node(at)}};
    }
  }
  return worst;
}

}  // namespace

CheckReport check_axioms(const Generator& gen, const std::vector<TerminalCondition>& terminals,
                         const GridSpec& grid, const AxiomOptions& opt) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "axioms";
  rep.relation =
      "monotonicity, constant preservation, zero-one law, translation invariance and "
      "time consistency of E^g_{s,t}";
  rep.inputs = {{"generator", gen.spec()},
                {"terminals", terminal_names(terminals)},
                {"grid", grid.to_json()},
                {"time_consistency_tolerance", opt.time_consistency_tolerance},
                {"check_refinement", opt.check_refinement},
                {"zero_one_tolerance", opt.zero_one_tolerance},
                {"zero_one_paths", opt.zero_one_paths},
                {"seed", opt.seed}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid(terminals);
  const std::size_t n = xg.size();
  const bool g0 = gen.flags().satisfies_g0;
  const bool yind = gen.flags().y_independent;
  const std::size_t mid = tg.index_of(0.5 * grid.T);

  Part mono("monotonicity", 1e-9);
  Part constant("constant_preserving", 1e-8, g0);
  Part zero_one("zero_one", opt.zero_one_tolerance, g0);
  Part translation("translation_invariance", 1e-9, yind);
  Part tc("time_consistency", opt.time_consistency_tolerance);
  Part tc_refine("time_consistency_refinement", 0.0, opt.check_refinement);

  // zero-one law: A = {B_s in I}, s = T/2, I = [-0.5, 0.5]; the path states at s
  const auto ens = PathEnsemble::simulate(TimeGrid(0.0, 0.5 * grid.T, 16), opt.zero_one_paths,
                                          opt.seed);
  auto in_I = [](double x) { return std::abs(x) <= 0.5; };
  const ValueSurface zero_surface =
      g0 ? bsde::solve(gen, TerminalCondition::constant(0.0), tg, xg) : ValueSurface{
                                                                            GridField(tg, xg),
                                                                            GridField(tg, xg),
                                                                            {}};

  for (const auto& xi : terminals) {
    const ValueSurface base = bsde::solve(gen, xi, tg, xg);
    const ValueSurface lower = bsde::solve(
        gen, shifted(xi, [](double x) { return -0.1 * std::exp(-x * x); }, " - 0.1 exp(-x^2)"), tg,
        xg);
    for (std::size_t i : {std::size_t{0}, mid}) {
      for (std::size_t j = 0; j < n; ++j) {
        const double d = lower.u.at(i, j) - base.u.at(i, j);
        if (d > mono.value) {
          mono.value = d;
          mono.witness = {{"terminal", xi.description}, {"t", tg.node(i)}, {"x", xg.node(j)}};
        }
      }
    }
    if (g0) {
      // E^g_{s,T}[1_A xi] per path: restart from xi on A and from 0 off A
      for (std::size_t p = 0; p < ens.n_paths(); ++p) {
        const double x = ens.position(p, ens.n_steps());
        const double lhs = in_I(x) ? base.u.at_state(mid, x) : zero_surface.u.at_state(mid, x);
        const double rhs = in_I(x) ? base.u.at_state(mid, x) : 0.0;
        const double d = std::abs(lhs - rhs);
        if (d > zero_one.value) {
          zero_one.value = d;
          zero_one.witness = {{"terminal", xi.description}, {"path", p}, {"B_s", x}};
        }
      }
    }
    if (yind) {
      for (double eta : {0.5, -0.3}) {
        const ValueSurface sh = bsde::solve(
            gen, shifted(xi, [eta](double) { return eta; }, " + c"), tg, xg);
        for (std::size_t i : {std::size_t{0}, mid}) {
          for (std::size_t j = 0; j < n; ++j) {
            const double d = std::abs(sh.u.at(i, j) - base.u.at(i, j) - eta);
            if (d > translation.value) {
              translation.value = d;
              translation.witness = {{"terminal", xi.description}, {"eta", eta},
                                     {"t", tg.node(i)}, {"x", xg.node(j)}};
            }
          }
        }
      }
    }
  }
  if (g0) {
    for (double c : {-0.7, 0.0, 0.5}) {
      const ValueSurface s = bsde::solve(gen, TerminalCondition::constant(c), tg, xg);
      for (double v : s.u.data()) {
        if (std::abs(v - c) > constant.value) {
          constant.value = std::abs(v - c);
          constant.witness = {{"c", c}};
        }
      }
    }
  }
  tc.value = time_consistency_error(gen, terminals, grid, tc.witness);
  double tc_fine = std::numeric_limits<double>::quiet_NaN();
  if (opt.check_refinement) {
    json w;
    tc_fine = time_consistency_error(gen, terminals, grid.refined(), w);
    tc_refine.value = tc_fine - tc.value - 1e-12;
    tc_refine.witness = {{"coarse", tc.value}, {"refined", tc_fine}};
  }

  const std::vector<Part> parts = {mono, constant, zero_one, translation, tc, tc_refine};
  json obs = json::object();
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& p : parts) {
    obs[p.name] = part_json(p);
    if (p.applicable) margin = std::min(margin, p.slack());
  }
  rep.observed = obs;
  rep.margin = margin;
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

CheckReport check_strict_comparison(const Generator& gen, const TerminalCondition& phi1,
                                    const TerminalCondition& phi2, const GridSpec& grid,
                                    double required_gap) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "strict_comparison";
  rep.relation = "phi1 >= phi2 with P(phi1 > phi2) > 0  implies  E^g[phi1] > E^g[phi2] at t = 0";
  rep.inputs = {{"generator", gen.spec()},
                {"phi1", phi1.description},
                {"phi2", phi2.description},
                {"grid", grid.to_json()},
                {"required_gap", required_gap}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid({phi1, phi2});
  double min_terminal_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < xg.size(); ++j) {
    min_terminal_gap = std::min(min_terminal_gap, phi1.phi(xg.node(j)) - phi2.phi(xg.node(j)));
  }
  if (min_terminal_gap < 0.0) {
    rep.status = Status::HypothesisNotSatisfied;
    rep.observed = {{"min_terminal_gap", min_terminal_gap}};
    rep.runtime_seconds = seconds_since(t0);
    return rep;
  }
  const ValueSurface s1 = bsde::solve(gen, phi1, tg, xg);
  const ValueSurface s2 = bsde::solve(gen, phi2, tg, xg);
  double min_gap = std::numeric_limits<double>::infinity();
  double at = 0.0;
  for (std::size_t j : interior_states(xg)) {
    const double d = s1.u.at(0, j) - s2.u.at(0, j);
    if (d < min_gap) {
      min_gap = d;
      at = xg.node(j);
    }
  }
  rep.observed = {{"min_gap", min_gap}, {"at_x", at}, {"min_terminal_gap", min_terminal_gap}};
  rep.margin = min_gap - required_gap;
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

CheckReport check_determinism(const Generator& gen, const TerminalCondition& phi, double s,
                              double t, const GridSpec& grid, double tolerance) {
  if (!(s < t)) throw InvalidArgument("check_determinism: need s < t");
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "determinism";
  rep.relation = "deterministic g: E^g_{s,t}[phi(B_t - B_s)] does not depend on F_s";
  rep.inputs = {{"generator", gen.spec()},
                {"phi", phi.description},
                {"s", s},
                {"t", t},
                {"grid", grid.to_json()},
                {"tolerance", tolerance}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid({phi});
  const TimeGrid sub = tg.sub(tg.index_of(s), tg.index_of(t));
  const std::size_t center = xg.size() / 2;
  json rows = json::array();
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int off : {-20, -10, 0, 10, 20}) {
    const std::size_t j = static_cast<std::size_t>(static_cast<long>(center) + off);
    const double x0 = xg.node(j);
    const auto f = phi.phi;
    const ValueSurface sv = bsde::solve(
        gen, TerminalCondition::function([f, x0](double x) { return f(x - x0); }, ""), sub, xg);
    const double v = sv.u.at(0, j);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    rows.push_back({{"x0", x0}, {"value", v}});
  }
  rep.observed = {{"values", rows}, {"spread", hi - lo}};
  rep.margin = -(hi - lo);
  rep.tolerance = tolerance;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

CheckReport check_bmo(const Generator& gen, const TerminalCondition& phi, const GridSpec& grid,
                      const BmoCheckOptions& opt) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "bmo";
  rep.relation = "||Z||^2_BMO <= (1+T) exp(8 k ||Y||_inf) (finite stopping-time family)";
  rep.inputs = {{"generator", gen.spec()},
                {"phi", phi.description},
                {"grid", grid.to_json()},
                {"ensemble_steps", opt.ensemble_steps},
                {"ensemble_paths", opt.ensemble_paths},
                {"n_subpaths", opt.n_subpaths},
                {"seed", opt.seed}};
  const TimeGrid tg = grid.time_grid();
  const SpaceGrid xg = grid.space_grid({phi});
  const ValueSurface s = bsde::solve(gen, phi, tg, xg);
  const TimeGrid eg(0.0, grid.T, opt.ensemble_steps);
  const auto ens = PathEnsemble::simulate(eg, opt.ensemble_paths, opt.seed);
  const auto family = stochastic::default_bmo_family(eg);
  const auto est = stochastic::bmo_estimate(s.v, ens, family, {opt.n_subpaths, opt.seed + 1});
  const double ysup = s.u.sup_norm();
  const double bound = (1.0 + grid.T) * std::exp(8.0 * gen.k() * ysup);
  rep.observed = {{"estimate", est.value},
                  {"per_member", est.per_member},
                  {"argmax", family[est.argmax].label()},
                  {"Y_sup", ysup},
                  {"k", gen.k()},
                  {"bound", bound},
                  {"slack", bound - est.value}};
  rep.margin = bound - est.value;
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

}  // namespace qgx::lab
