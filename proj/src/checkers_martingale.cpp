#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "qgx/checkers.hpp"
#include "qgx/errors.hpp"
#include "qgx/quadrature.hpp"

namespace qgx::lab {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void mean_and_stderr(const std::vector<double>& xs, double& mean, double& se) {
  const double n = static_cast<double>(xs.size());
  double s = 0.0;
  for (double x : xs) s += x;
  mean = s / n;
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  se = xs.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
}

StateValues row_of(const GridField& f, std::size_t i) {
  const auto r = f.row(i);
  return StateValues(r.begin(), r.end());
}

void require_on_operator_grids(const GExpectationOperator& op, const GridField& X,
                               const char* who) {
  if (!(X.tgrid() == op.tgrid()) || !(X.xgrid() == op.xgrid())) {
    throw InvalidArgument(std::string(who) + ": X must live on the operator grids");
  }
}

}  // namespace

// ---------------------------------------------------------------------------

DoobMeyerResult doob_meyer_decompose(const GExpectationOperator& op, const GridField& X,
                                     std::size_t coarse_steps, const PathEnsemble* ensemble,
                                     double reconstruction_tolerance) {
  require_on_operator_grids(op, X, "doob_meyer_decompose");
  if (coarse_steps == 0) throw InvalidArgument("doob_meyer_decompose: coarse_steps must be positive");
  const auto t0 = Clock::now();
  const TimeGrid& tg = op.tgrid();
  const SpaceGrid& xg = op.xgrid();
  const std::size_t n = xg.size();

  std::vector<std::size_t> idx;
  DoobMeyerResult out;
  for (std::size_t k = 0; k <= coarse_steps; ++k) {
    const double t = tg.t0() + tg.length() * static_cast<double>(k) / coarse_steps;
    idx.push_back(tg.index_of(t));
    out.coarse_times.push_back(tg.node(idx.back()));
  }

  const auto verdict = gexp::classify(op, X, gexp::dyadic_pairs(tg));
  Generator gen = op.generator();
  double sign = 1.0;
  if (verdict.classification == gexp::Classification::Supermartingale) {
    gen = generators::reflect(gen);
    sign = -1.0;
    out.reflected = true;
  } else if (verdict.classification == gexp::Classification::Neither) {
    throw InvalidArgument("doob_meyer_decompose: X is neither a g-sub- nor a g-supermartingale");
  }

  CheckReport& rep = out.report;
  rep.theorem = "doob_meyer";
  rep.relation =
      "X_t = X_T + int g ds - (A_T - A_t) - int Z dB with A increasing, A_0 = 0; "
      "A_{k+1} - A_k = E^g_{t_k,t_{k+1}}[X_{t_{k+1}}] - X_{t_k}";
  rep.inputs = {{"operator", op.describe()},
                {"coarse_steps", coarse_steps},
                {"reconstruction_tolerance", reconstruction_tolerance}};

  // Work with the (reflected if needed) submartingale sign * X.
  auto signed_row = [&](std::size_t i) {
    StateValues r = row_of(X, i);
    for (double& v : r) v *= sign;
    return r;
  };
  const auto interior = interior_states(xg);
  double min_inc = std::numeric_limits<double>::infinity();
  double max_abs = 0.0;
  std::vector<StateValues> inc_signed;
  for (std::size_t k = 0; k < coarse_steps; ++k) {
    const ValueSurface s = bsde::solve_values(gen, signed_row(idx[k + 1]), tg.sub(idx[k], idx[k + 1]),
                                              xg, nullptr, op.options());
    const StateValues xs = signed_row(idx[k]);
    StateValues r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = s.u.at(0, j) - xs[j];
    for (std::size_t j : interior) {
      min_inc = std::min(min_inc, r[j]);
      max_abs = std::max(max_abs, std::abs(r[j]));
    }
    inc_signed.push_back(r);
    StateValues r_out = r;
    for (double& v : r_out) v *= sign;
    out.increments.push_back(std::move(r_out));
  }

  // Round trip: solve with driver density -dA/dt from (sign X)_T.
  const double dT = tg.length() / static_cast<double>(coarse_steps);
  bsde::DriverV driver;
  driver.state_dependent = true;
  const double tstart = tg.t0();
  driver.density = [&inc_signed, &xg, dT, tstart, coarse_steps](double t, double x) {
    auto k = static_cast<std::size_t>(std::floor((t - tstart) / dT));
    k = std::min(k, coarse_steps - 1);
    return -xg.interpolate(inc_signed[k], x) / dT;
  };
  bsde::SolverOptions ro = op.options();
  ro.enforce_bound = false;
  const ValueSurface recon = bsde::solve_values(gen, signed_row(tg.n_steps()), tg, xg, &driver, ro);
  double recon_err = 0.0;
  for (std::size_t i : idx) {
    const StateValues xs = signed_row(i);
    for (std::size_t j : interior) recon_err = std::max(recon_err, std::abs(recon.u.at(i, j) - xs[j]));
  }
  out.reconstruction_error = recon_err;

  if (ensemble != nullptr) {
    const TimeGrid& eg = ensemble->grid();
    std::vector<std::size_t> eidx;
    for (double t : out.coarse_times) eidx.push_back(eg.index_of(t));
    out.paths.resize(ensemble->n_paths());
    for (std::size_t p = 0; p < ensemble->n_paths(); ++p) {
      auto& a = out.paths[p];
      a.assign(coarse_steps + 1, 0.0);
      for (std::size_t k = 0; k < coarse_steps; ++k) {
        a[k + 1] = a[k] + xg.interpolate(out.increments[k], ensemble->position(p, eidx[k]));
      }
    }
  }

  // Compensator at the coarse times along the state x = 0 path, for reporting.
  json a_center = json::array();
  double acc = 0.0;
  a_center.push_back(0.0);
  for (const auto& r : out.increments) {
    acc += xg.interpolate(r, 0.0);
    a_center.push_back(acc);
  }

  rep.observed = {{"classification", gexp::to_string(verdict.classification)},
                  {"reflected", out.reflected},
                  {"coarse_times", out.coarse_times},
                  {"min_increment", min_inc},
                  {"max_abs_increment", max_abs},
                  {"A_at_zero_state", a_center},
                  {"reconstruction_error", recon_err}};
  rep.margin = std::min(min_inc + 1e-8, reconstruction_tolerance - recon_err);
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------

CheckReport check_optional_sampling(const GExpectationOperator& op, const GridField& X,
                                    gexp::Classification expected,
                                    const FiniteStoppingTime& sigma,
                                    const FiniteStoppingTime& tau, const PathEnsemble& ensemble,
                                    double tolerance) {
  const auto t0 = Clock::now();
  CheckReport rep;
  rep.theorem = "optional_sampling";
  rep.relation = "E^g_{sigma,tau}[X_tau] (=, >=, <=) X_sigma per the g-martingale class of X";
  rep.inputs = {{"operator", op.describe()},
                {"expected", gexp::to_string(expected)},
                {"sigma", sigma.label()},
                {"tau", tau.label()},
                {"n_paths", ensemble.n_paths()},
                {"seed", ensemble.seed()},
                {"ensemble_steps", ensemble.n_steps()},
                {"tolerance", tolerance}};
  const auto values = gexp::evaluate_at_stopping_times(op, sigma, tau, X, ensemble);
  const auto s_steps = sigma.assign(ensemble);
  const TimeGrid& eg = ensemble.grid();
  double min_gap = std::numeric_limits<double>::infinity();
  double max_gap = -std::numeric_limits<double>::infinity();
  std::vector<double> gaps(values.size());
  std::size_t worst_path = 0;
  for (std::size_t p = 0; p < values.size(); ++p) {
    const std::size_t s = s_steps[p];
    const double xs = X.at_state(op.tgrid().index_of(eg.node(s)), ensemble.position(p, s));
    gaps[p] = values[p] - xs;
    min_gap = std::min(min_gap, gaps[p]);
    max_gap = std::max(max_gap, gaps[p]);
  }
  double mean = 0.0, se = 0.0;
  mean_and_stderr(gaps, mean, se);
  double margin = 0.0;
  switch (expected) {
    case gexp::Classification::Martingale:
      margin = -std::max(-min_gap, max_gap);
      for (std::size_t p = 0; p < gaps.size(); ++p) {
        if (std::abs(gaps[p]) > std::abs(gaps[worst_path])) worst_path = p;
      }
      break;
    case gexp::Classification::Submartingale:
      margin = min_gap;
      worst_path = std::min_element(gaps.begin(), gaps.end()) - gaps.begin();
      break;
    case gexp::Classification::Supermartingale:
      margin = -max_gap;
      worst_path = std::max_element(gaps.begin(), gaps.end()) - gaps.begin();
      break;
    default:
      rep.status = Status::HypothesisNotSatisfied;
      rep.observed = {{"reason", "X has no g-martingale classification"}};
      rep.runtime_seconds = seconds_since(t0);
      return rep;
  }
  rep.observed = {{"min_gap", min_gap},
                  {"max_gap", max_gap},
                  {"mean_gap", mean},
                  {"mean_gap_stderr", se},
                  {"worst_path", worst_path}};
  rep.margin = margin;
  rep.tolerance = tolerance;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return rep;
}

// ---------------------------------------------------------------------------

int count_upcrossings(const std::vector<double>& values, double a, double b) {
  if (!(b > a)) throw InvalidArgument("count_upcrossings: need a < b");
  int count = 0;
  bool below = false;
  for (double v : values) {
    if (!below) {
      if (v <= a) below = true;
    } else if (v >= b) {
      ++count;
      below = false;
    }
  }
  return count;
}

UpcrossReport check_upcrossing(const GExpectationOperator& op, const GridField& X, double a,
                               double b, const std::vector<double>& partition,
                               const PathEnsemble& ensemble) {
  if (!(b > a)) throw InvalidArgument("check_upcrossing: need a < b");
  if (partition.size() < 2) throw InvalidArgument("check_upcrossing: partition needs >= 2 times");
  require_on_operator_grids(op, X, "check_upcrossing");
  const TimeGrid& tg = op.tgrid();
  const TimeGrid& eg = ensemble.grid();
  if (!tg.refines(eg)) {
    throw InvalidArgument("check_upcrossing: ensemble times must be operator grid nodes");
  }
  std::vector<std::size_t> pe;  // partition as ensemble steps
  for (double t : partition) pe.push_back(eg.index_of(t));
  if (!std::is_sorted(pe.begin(), pe.end()) ||
      std::adjacent_find(pe.begin(), pe.end()) != pe.end()) {
    throw InvalidArgument("check_upcrossing: partition must be strictly increasing");
  }
  const auto t0 = Clock::now();
  const Generator& gen = op.generator();
  const SpaceGrid& xg = op.xgrid();
  const double T = tg.t_end();
  const double k = gen.k();
  const double xnorm = X.sup_norm();
  const double J = (xnorm + k * T) * std::exp(k * T);
  const double drift = k * (J + 1.0);

  UpcrossReport out;
  out.a = a;
  out.b = b;
  out.partition = partition;

  // beta and Z^2 tabulated at (ensemble step, space node); zero outside the partition span
  const std::size_t n_e = eg.n_steps();
  std::vector<StateValues> beta_tab(n_e, StateValues(xg.size(), 0.0));
  std::vector<StateValues> z2_tab(n_e, StateValues(xg.size(), 0.0));
  const auto gl = stochastic::gauss_legendre(8, 0.0, 1.0);
  const std::size_t ratio = tg.n_steps() / eg.n_steps();
  double ysup = 0.0;
  for (std::size_t j = 1; j < pe.size(); ++j) {
    const std::size_t i0 = tg.index_of(eg.node(pe[j - 1]));
    const std::size_t i1 = tg.index_of(eg.node(pe[j]));
    const ValueSurface s = bsde::solve_values(gen, row_of(X, i1), tg.sub(i0, i1), xg, nullptr,
                                              op.options());
    ysup = std::max(ysup, s.u.sup_norm());
    for (std::size_t e = pe[j - 1]; e < pe[j]; ++e) {
      const std::size_t i = (e - pe[j - 1]) * ratio;
      const double t = eg.node(e);
      for (std::size_t m = 0; m < xg.size(); ++m) {
        const double y = s.u.at(i, m);
        const double z = s.v.at(i, m);
        double acc = 0.0;
        for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
          acc += gl.weights[q] * gen.dz(t, y, gl.nodes[q] * z);
        }
        beta_tab[e][m] = acc;
        z2_tab[e][m] = z * z;
      }
    }
  }
  const stochastic::AdaptedProcess beta = [&beta_tab, &xg](const stochastic::PathView& v,
                                                           std::size_t i) {
    return xg.interpolate(beta_tab[i], v.at(i));
  };
  const auto w = stochastic::stochastic_exponential_terminal(beta, ensemble);

  const std::size_t np = ensemble.n_paths();
  const double dt = eg.dt();
  std::vector<std::size_t> xi_idx;
  for (std::size_t e : pe) xi_idx.push_back(tg.index_of(eg.node(e)));
  out.counts.resize(np);
  out.weights = w.weight;
  std::vector<double> wu(np), u(np), doob(np), diff(np), zen(np);
  std::vector<double> seq(pe.size());
  for (std::size_t p = 0; p < np; ++p) {
    for (std::size_t j = 0; j < pe.size(); ++j) {
      const double t = eg.node(pe[j]);
      seq[j] = X.at_state(xi_idx[j], ensemble.position(p, pe[j])) +
               drift * t;
    }
    out.counts[p] = count_upcrossings(seq, a, b);
    u[p] = out.counts[p];
    wu[p] = w.weight[p] * u[p];
    doob[p] = std::max(seq.back() - a, 0.0) / (b - a);
    diff[p] = u[p] - doob[p];
    double ze = 0.0;
    for (std::size_t e = pe.front(); e < pe.back(); ++e) {
      ze += xg.interpolate(z2_tab[e], ensemble.position(p, e)) * dt;
    }
    zen[p] = ze;
  }
  mean_and_stderr(wu, out.weighted_mean, out.weighted_stderr);
  mean_and_stderr(u, out.plain_mean, out.plain_stderr);
  double doob_se = 0.0, diff_mean = 0.0, diff_se = 0.0, z_energy = 0.0, z_se = 0.0;
  mean_and_stderr(doob, out.doob_rhs, doob_se);
  mean_and_stderr(diff, diff_mean, diff_se);
  mean_and_stderr(zen, z_energy, z_se);
  out.weight_mean = w.mean;
  out.weight_stderr = w.stderr_;
  double be = 0.0, be_se = 0.0;
  mean_and_stderr(w.energy, be, be_se);
  out.beta_energy = be;
  out.bound = (xnorm + drift * T + std::abs(a)) / (b - a);
  const double ell = gen.ell(std::max(J, ysup));
  out.energy_bound = 2.0 * ell * ell * ((partition.back() - partition.front()) + z_energy);

  CheckReport& rep = out.report;
  rep.theorem = "upcrossing";
  rep.relation =
      "E[E(beta.B)_{t_n} U_a^b(X~, D)] <= (||X|| + k(J+1)T + |a|)/(b-a), "
      "X~_t = X_t + k(J+1)t, J = (||X|| + kT)e^{kT}; E int |beta|^2 ds <= C";
  rep.inputs = {{"operator", op.describe()},
                {"a", a},
                {"b", b},
                {"partition", partition},
                {"n_paths", np},
                {"seed", ensemble.seed()},
                {"ensemble_steps", eg.n_steps()}};
  const double m_bound = out.bound + 3.0 * out.weighted_stderr - out.weighted_mean;
  const double m_energy = std::isfinite(be) ? out.energy_bound - be : -1.0;
  const double m_weight = 3.0 * out.weight_stderr - std::abs(out.weight_mean - 1.0);
  double margin = std::min({m_bound, m_energy, m_weight});
  json obs = {{"X_sup", xnorm},
              {"J", J},
              {"drift", drift},
              {"weighted_mean", out.weighted_mean},
              {"weighted_stderr", out.weighted_stderr},
              {"plain_mean", out.plain_mean},
              {"plain_stderr", out.plain_stderr},
              {"bound", out.bound},
              {"weight_mean", out.weight_mean},
              {"weight_stderr", out.weight_stderr},
              {"beta_energy", be},
              {"z_energy", z_energy},
              {"energy_bound", out.energy_bound},
              {"doob_rhs", out.doob_rhs},
              {"max_count", *std::max_element(out.counts.begin(), out.counts.end())}};
  if (gen.name() == "zero") {
    // classical reduction: Doob's inequality for the drift-adjusted submartingale
    const double m_doob = 3.0 * diff_se - diff_mean;
    obs["doob_difference_mean"] = diff_mean;
    obs["doob_difference_stderr"] = diff_se;
    margin = std::min(margin, m_doob);
  }
  rep.observed = obs;
  rep.margin = margin;
  rep.tolerance = 0.0;
  rep.status = Status::Pass;
  rep.settle();
  rep.runtime_seconds = seconds_since(t0);
  return out;
}

}  // namespace qgx::lab
