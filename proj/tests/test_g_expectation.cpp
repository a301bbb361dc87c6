#include <algorithm>
#include <cmath>
#include <string>

#include <doctest.h>

#include "oracles.hpp"
#include "qgx/errors.hpp"
#include "qgx/g_expectation.hpp"

using namespace qgx;
using namespace qgx::gexp;
namespace gen = qgx::generators;

namespace {

double sup_diff(const StateValues& a, const StateValues& b, const SpaceGrid& xg, double within) {
  double d = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (std::abs(xg.node(j)) <= within) d = std::max(d, std::abs(a[j] - b[j]));
  }
  return d;
}

GridField shifted(const GridField& u, double c) {
  GridField out = u;
  for (std::size_t i = 0; i <= u.tgrid().n_steps(); ++i) {
    for (double& v : out.row(i)) v += c * u.tgrid().node(i);
  }
  return out;
}

const auto kTanh = TerminalCondition::expression("tanh(x)");

}  // namespace

TEST_CASE("evaluate") {
  const GExpectationOperator op(gen::entropic(1.0), kTanh, TimeGrid(0.0, 1.0, 64),
                                SpaceGrid::symmetric(8.0, 161));
  const StateValues xi = op.sample(TerminalCondition::expression("exp(-x^2)"));
  CHECK(op.evaluate(0.5, 0.5, xi) == xi);
  CHECK_THROWS_AS(op.evaluate(0.75, 0.5, xi), InvalidArgument);
  CHECK_THROWS_AS(op.evaluate(0.0, 0.5, StateValues(3, 0.0)), InvalidArgument);
  // re-solving the cached problem reproduces it bit for bit
  CHECK(op.evaluate(0.0, 1.0, op.sample(kTanh)) == op.conditional(0.0));
  CHECK(op.evaluate(0.25, 1.0, op.sample(kTanh)) == op.conditional(0.25));
  CHECK(op.at(0.0, 0.0) == op.surface().u.at_state(0, 0.0));
  const StateValues c = op.evaluate(0.0, 0.5, StateValues(161, 0.4));
  for (double v : c) CHECK(std::abs(v - 0.4) <= 1e-12);
  CHECK(op.describe()["generator"]["name"] == "entropic");
}

TEST_CASE("zero generator gives the heat-kernel conditional expectation") {
  const GExpectationOperator op(gen::zero(), kTanh, TimeGrid(0.0, 1.0, 2000),
                                bsde::default_space_grid(kTanh.phi, 1.0));
  const auto v = op.evaluate(0.0, 1.0, kTanh);
  for (double x : {-1.0, -0.3, 0.0, 0.5, 2.0}) {
    const double ref = oracle::normal_mean([](double y) { return std::tanh(y); }, x);
    CHECK(std::abs(op.xgrid().interpolate(v, x) - ref) <= 1e-4);
  }
}

TEST_CASE("compose") {
  SUBCASE("degenerate first stage") {
    const GExpectationOperator op(gen::entropic(1.0), kTanh, TimeGrid(0.0, 1.0, 64),
                                  SpaceGrid::symmetric(8.0, 161));
    const auto xi = op.sample(kTanh);
    CHECK(compose(op, 0.5, 0.5, 1.0, xi) == op.evaluate(0.5, 1.0, xi));
    CHECK_THROWS_AS(compose(op, 0.6, 0.5, 1.0, xi), InvalidArgument);
  }
  SUBCASE("tower property for the zero generator") {
    // the restart grid differs from the base grid, so the gap is O(dx^2)
    const GExpectationOperator op(gen::zero(), kTanh, TimeGrid(0.0, 1.0, 1000),
                                  SpaceGrid::symmetric(8.0, 1601));
    const auto xi = op.sample(kTanh);
    CHECK(sup_diff(compose(op, 0.0, 0.5, 1.0, xi), op.evaluate(0.0, 1.0, xi), op.xgrid(), 4.0) <=
          1e-6);
  }
  SUBCASE("entropic time consistency improves under refinement") {
    double prev = 1.0;
    for (std::size_t l = 0; l < 2; ++l) {
      const GExpectationOperator op(gen::entropic(1.0), kTanh, TimeGrid(0.0, 1.0, 250u << l),
                                    SpaceGrid::symmetric(8.0, 200 * (1u << l) + 1));
      const auto xi = op.sample(kTanh);
      const double d =
          sup_diff(compose(op, 0.0, 0.5, 1.0, xi), op.evaluate(0.0, 1.0, xi), op.xgrid(), 4.0);
      CHECK(d < 5e-3);
      CHECK(d < prev);
      prev = d;
    }
  }
}

TEST_CASE("evaluate_at_stopping_times") {
  const TimeGrid tg(0.0, 1.0, 256);
  const GExpectationOperator op(gen::entropic(1.0), kTanh, tg, SpaceGrid::symmetric(8.0, 321));
  const TimeGrid eg(0.0, 1.0, 8);
  const auto ens = PathEnsemble::simulate(eg, 400, 5);
  const GridField& X = op.surface().u;

  SUBCASE("deterministic times match evaluate along paths") {
    // xi = tanh(2 x) placed at t = 0.75, read back at s = 0.25
    GridField F(tg, op.xgrid());
    for (std::size_t j = 0; j < op.xgrid().size(); ++j)
      F.at(192, j) = std::tanh(2.0 * op.xgrid().node(j));
    const auto sigma = FiniteStoppingTime::deterministic(eg, 2);
    const auto tau = FiniteStoppingTime::deterministic(eg, 6);
    const auto got = evaluate_at_stopping_times(op, sigma, tau, F, ens);
    const StateValues row(F.row(192).begin(), F.row(192).end());
    const auto direct = op.evaluate(0.25, 0.75, row);
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
      CHECK(std::abs(got[p] - op.xgrid().interpolate(direct, ens.position(p, 2))) <= 1e-6);
    }
  }
  SUBCASE("paths already stopped pass X_tau through") {
    const auto tau = FiniteStoppingTime::first_hitting(eg, 0.3, 8);
    const auto got = evaluate_at_stopping_times(op, tau, tau, X, ens);
    const auto steps = tau.assign(ens);
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
      CHECK(got[p] == X.at_state(tg.index_of(eg.node(steps[p])), ens.position(p, steps[p])));
    }
  }
  SUBCASE("a g-martingale sampled at two-valued times") {
    const auto sigma = FiniteStoppingTime::two_valued(
        eg, 1, 3, [](double x) { return x > 0.0; }, "sigma");
    const auto tau = FiniteStoppingTime::two_valued(
        eg, 4, 8, [](double x) { return std::abs(x) < 0.5; }, "tau");
    const auto got = evaluate_at_stopping_times(op, sigma, tau, X, ens);
    const auto s_steps = sigma.assign(ens);
    double worst = 0.0;
    for (std::size_t p = 0; p < ens.n_paths(); ++p) {
      const double xs = X.at_state(tg.index_of(eg.node(s_steps[p])), ens.position(p, s_steps[p]));
      worst = std::max(worst, std::abs(got[p] - xs));
    }
    CHECK(worst <= 5e-3);
  }
  SUBCASE("sigma after tau names the path") {
    const auto sigma = FiniteStoppingTime::deterministic(eg, 4);
    const auto tau = FiniteStoppingTime::first_hitting(eg, 0.2, 8);
    try {
      evaluate_at_stopping_times(op, sigma, tau, X, ens);
      FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
      CHECK(std::string(e.what()).find("on path ") != std::string::npos);
    }
  }
}

TEST_CASE("classify") {
  const GExpectationOperator op(gen::entropic(1.0), kTanh, TimeGrid(0.0, 1.0, 64),
                                SpaceGrid::symmetric(8.0, 161));
  const GridField& u = op.surface().u;
  const auto mart = classify(op, u);
  CHECK(mart.classification == Classification::Martingale);
  CHECK(mart.worst_violation <= mart.tolerance);

  const auto sub = classify(op, shifted(u, 0.3));
  CHECK(sub.classification == Classification::Submartingale);
  // translation invariance: E_{s,t}[X_t] - X_s = c (t - s) exactly
  CHECK(sub.min_gap == doctest::Approx(0.3 / 8).epsilon(1e-6));
  CHECK(sub.max_gap == doctest::Approx(0.3).epsilon(1e-6));

  const GExpectationOperator heat(gen::zero(), kTanh, TimeGrid(0.0, 1.0, 64),
                                  SpaceGrid::symmetric(8.0, 161));
  CHECK(classify(heat, shifted(heat.surface().u, -0.2)).classification ==
        Classification::Supermartingale);

  GridField wiggle = u;
  for (std::size_t i = 0; i <= 64; ++i)
    for (double& v : wiggle.row(i)) v += 0.1 * std::cos(8.0 * M_PI * i / 64.0);
  CHECK(classify(op, wiggle).classification == Classification::Neither);
  CHECK(dyadic_pairs(op.tgrid()).size() == 36);
}

TEST_CASE("property: evaluate is monotone in the terminal value") {
  const GExpectationOperator op(gen::entropic(1.0), kTanh, TimeGrid(0.0, 1.0, 64),
                                SpaceGrid::symmetric(8.0, 161));
  const auto& xg = op.xgrid();
  for (double shift : {-1.0, 0.0, 1.5}) {
    const auto hi = op.sample(TerminalCondition::expression("tanh(x)"));
    StateValues lo = hi;
    for (std::size_t j = 0; j < lo.size(); ++j) lo[j] -= 0.3 * std::exp(-std::pow(xg.node(j) - shift, 2));
    for (double s : {0.0, 0.25, 0.5}) {
      const auto a = op.evaluate(s, 0.75, hi);
      const auto b = op.evaluate(s, 0.75, lo);
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(a[j] >= b[j] - 1e-9);
    }
  }
}

TEST_CASE("property: translation invariance for a y-independent generator") {
  const GExpectationOperator op(gen::abs_drift(0.7), kTanh, TimeGrid(0.0, 1.0, 64),
                                SpaceGrid::symmetric(8.0, 161));
  const auto xi = op.sample(TerminalCondition::expression("tanh(3*x) + 0.2*exp(-x^2)"));
  for (double eta : {-0.6, 0.25, 2.0}) {
    StateValues moved = xi;
    for (double& v : moved) v += eta;
    const auto a = op.evaluate(0.0, 1.0, xi);
    const auto b = op.evaluate(0.0, 1.0, moved);
    for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(b[j] - a[j] - eta) <= 1e-9);
  }
}
