#include "qgx/g_expectation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qgx/errors.hpp"

namespace qgx::gexp {

GExpectationOperator::GExpectationOperator(Generator gen, TerminalCondition terminal,
                                           TimeGrid tgrid, SpaceGrid xgrid,
                                           SolverOptions options)
    : gen_(std::move(gen)), terminal_(std::move(terminal)), tgrid_(tgrid), xgrid_(xgrid),
      options_(options), surface_(bsde::solve(gen_, terminal_, tgrid_, xgrid_, nullptr, options_)) {}

StateValues GExpectationOperator::conditional(double t) const {
  const auto row = surface_.u.row(tgrid_.index_of(t));
  return StateValues(row.begin(), row.end());
}

StateValues GExpectationOperator::sample(const TerminalCondition& xi) const {
  StateValues v(xgrid_.size());
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = xi.phi(xgrid_.node(j));
  return v;
}

ValueSurface GExpectationOperator::evaluate_surface(double s, double t, const StateValues& xi,
                                                    const bsde::DriverV* driver) const {
  if (s > t) throw InvalidArgument("evaluate: need s <= t");
  if (s == t) throw InvalidArgument("evaluate_surface: degenerate interval");
  const auto is = tgrid_.index_of(s);
  const auto it = tgrid_.index_of(t);
  return bsde::solve_values(gen_, xi, tgrid_.sub(is, it), xgrid_, driver, options_);
}

StateValues GExpectationOperator::evaluate(double s, double t, const StateValues& xi) const {
  if (s > t) throw InvalidArgument("evaluate: need s <= t");
  if (xi.size() != xgrid_.size()) {
    throw InvalidArgument("evaluate: terminal values do not match the space grid");
  }
  if (tgrid_.index_of(s) == tgrid_.index_of(t)) return xi;
  const ValueSurface surf = evaluate_surface(s, t, xi);
  const auto row = surf.u.row(0);
  return StateValues(row.begin(), row.end());
}

StateValues GExpectationOperator::evaluate(double s, double t, const TerminalCondition& xi) const {
  return evaluate(s, t, sample(xi));
}

nlohmann::json GExpectationOperator::describe() const {
  return {{"generator", gen_.spec()},
          {"terminal", terminal_.description},
          {"time_grid", {{"t0", tgrid_.t0()}, {"T", tgrid_.t_end()}, {"n_steps", tgrid_.n_steps()}}},
          {"space_grid",
           {{"x_min", xgrid_.x_min()}, {"x_max", xgrid_.x_max()}, {"n_points", xgrid_.size()}}}};
}

StateValues compose(const GExpectationOperator& op, double r, double s, double t,
                    const StateValues& xi) {
  if (r > s || s > t) throw InvalidArgument("compose: need r <= s <= t");
  const StateValues mid = op.evaluate(s, t, xi);
  const auto& tg = op.tgrid();
  const auto& xg = op.xgrid();
  if (tg.index_of(r) == tg.index_of(s)) return mid;
  // restart grid: about 3/4 of the points, still odd and containing 0
  std::size_t m = (xg.size() * 3 / 4) | 1u;
  SpaceGrid xg2 = xg;
  for (; m >= 5; m -= 2) {
    try {
      xg2 = SpaceGrid(xg.x_min(), xg.x_max(), m);
      break;
    } catch (const InvalidArgument&) {
    }
  }
  StateValues restart(xg2.size());
  for (std::size_t j = 0; j < xg2.size(); ++j) restart[j] = xg.interpolate(mid, xg2.node(j));
  const ValueSurface stage2 = bsde::solve_values(
      op.generator(), restart, tg.sub(tg.index_of(r), tg.index_of(s)), xg2, nullptr, op.options());
  StateValues out(xg.size());
  for (std::size_t j = 0; j < xg.size(); ++j) out[j] = stage2.u.at_state(0, xg.node(j));
  return out;
}

std::vector<double> evaluate_at_stopping_times(const GExpectationOperator& op,
                                               const FiniteStoppingTime& sigma,
                                               const FiniteStoppingTime& tau, const GridField& X,
                                               const PathEnsemble& ensemble) {
  const TimeGrid& eg = ensemble.grid();
  if (!(sigma.grid() == eg) || !(tau.grid() == eg)) {
    throw InvalidArgument("evaluate_at_stopping_times: stopping times must use the ensemble grid");
  }
  if (!op.tgrid().refines(eg)) {
    throw InvalidArgument(
        "evaluate_at_stopping_times: ensemble times must be nodes of the operator grid");
  }
  if (!(X.tgrid() == op.tgrid()) || !(X.xgrid() == op.xgrid())) {
    throw InvalidArgument("evaluate_at_stopping_times: X must live on the operator grids");
  }
  const auto s_steps = sigma.assign(ensemble);
  const auto t_steps = tau.assign(ensemble);
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    if (s_steps[p] > t_steps[p]) {
      throw InvalidArgument("evaluate_at_stopping_times: sigma > tau on path " +
                            std::to_string(p));
    }
  }
  const auto& xg = op.xgrid();
  const std::size_t cap = tau.cap();
  auto x_row = [&](std::size_t k) {
    const auto row = X.row(op.tgrid().index_of(eg.node(k)));
    return StateValues(row.begin(), row.end());
  };
  // V[k]: value at ensemble step k on paths not stopped through k
  std::vector<StateValues> V(cap + 1);
  StateValues w = x_row(cap);
  for (std::size_t k = cap; k-- > 0;) {
    V[k] = op.evaluate(eg.node(k), eg.node(k + 1), w);
    if (k == 0) break;
    w = V[k];
    if (tau.is_candidate(k)) {
      const StateValues xk = x_row(k);
      for (std::size_t j = 0; j < xg.size(); ++j) {
        if (tau.stops_at(k, xg.node(j))) w[j] = xk[j];
      }
    }
  }
  std::vector<double> out(ensemble.n_paths());
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    const std::size_t s = s_steps[p];
    const double x = ensemble.position(p, s);
    if (s == t_steps[p]) {
      out[p] = X.at_state(op.tgrid().index_of(eg.node(s)), x);
    } else {
      out[p] = xg.interpolate(V[s], x);
    }
  }
  return out;
}

const char* to_string(Classification c) {
  switch (c) {
    case Classification::Martingale: return "martingale";
    case Classification::Submartingale: return "submartingale";
    case Classification::Supermartingale: return "supermartingale";
    default: return "neither";
  }
}

std::vector<std::pair<double, double>> dyadic_pairs(const TimeGrid& tgrid, int levels) {
  std::vector<std::pair<double, double>> out;
  const double T0 = tgrid.t0();
  const double L = tgrid.length();
  for (int i = 0; i < levels; ++i) {
    for (int j = i + 1; j <= levels; ++j) {
      out.emplace_back(T0 + L * i / levels, T0 + L * j / levels);
    }
  }
  return out;
}

GMartingaleVerdict classify(const GExpectationOperator& op, const GridField& X,
                            const std::vector<std::pair<double, double>>& pairs_in,
                            double relative_tolerance) {
  if (!(X.tgrid() == op.tgrid()) || !(X.xgrid() == op.xgrid())) {
    throw InvalidArgument("classify: X must live on the operator grids");
  }
  const auto pairs = pairs_in.empty() ? dyadic_pairs(op.tgrid()) : pairs_in;
  GMartingaleVerdict v;
  v.tolerance = relative_tolerance * std::max(1.0, X.sup_norm());
  v.min_gap = std::numeric_limits<double>::infinity();
  v.max_gap = -std::numeric_limits<double>::infinity();
  std::pair<double, double> at_min{}, at_max{};
  for (const auto& [s, t] : pairs) {
    const auto xs = X.row(op.tgrid().index_of(s));
    const auto xt_span = X.row(op.tgrid().index_of(t));
    const StateValues e = op.evaluate(s, t, StateValues(xt_span.begin(), xt_span.end()));
    for (std::size_t j = 0; j < e.size(); ++j) {
      const double gap = e[j] - xs[j];
      if (gap < v.min_gap) {
        v.min_gap = gap;
        at_min = {s, t};
      }
      if (gap > v.max_gap) {
        v.max_gap = gap;
        at_max = {s, t};
      }
    }
  }
  const bool sub = v.min_gap >= -v.tolerance;
  const bool super = v.max_gap <= v.tolerance;
  if (sub && super) {
    v.classification = Classification::Martingale;
    v.worst_violation = std::max(-v.min_gap, v.max_gap);
    v.worst_pair = -v.min_gap > v.max_gap ? at_min : at_max;
  } else if (sub) {
    v.classification = Classification::Submartingale;
    v.worst_violation = std::max(0.0, -v.min_gap);
    v.worst_pair = at_min;
  } else if (super) {
    v.classification = Classification::Supermartingale;
    v.worst_violation = std::max(0.0, v.max_gap);
    v.worst_pair = at_max;
  } else {
    v.classification = Classification::Neither;
    v.worst_violation = std::min(-v.min_gap, v.max_gap);
    v.worst_pair = -v.min_gap < v.max_gap ? at_min : at_max;
  }
  return v;
}

}  // namespace qgx::gexp
