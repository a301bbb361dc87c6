#include <cmath>
#include <vector>

#include <doctest.h>

#include "qgx/driver.hpp"
#include "qgx/errors.hpp"
#include "qgx/expression.hpp"
#include "qgx/generators.hpp"
#include "qgx/validation.hpp"

using namespace qgx;
using namespace qgx::generators;

namespace {

template <class F>
void for_lattice(const Lattice& lat, F f) {
  for (int i = 0; i < lat.n_t; ++i)
    for (int j = 0; j < lat.n_y; ++j)
      for (int l = 0; l < lat.n_z; ++l) f(lat.t(i), lat.y(j), lat.z(l));
}

std::vector<Generator> sample_generators() {
  return {zero(),           linear(0.3),          linear(-1.2),   entropic(1.0),
          entropic(0.25),   abs_drift(0.5),       custom("y^2 + 0.5*z^2", 1.0, "1 + x^2"),
          custom("-y + sin(t)*z", 1.0, "1"), custom("tanh(y)*z^2", 1.0, "1")};
}

}  // namespace

TEST_CASE("expression evaluation") {
  const auto e = Expression::parse("2*x^2 - max(y, 1) + exp(0) / 4");
  CHECK(e.eval({0.0, 3.0, 0.0, 1.5}) == doctest::Approx(2 * 2.25 - 3 + 0.25));
  CHECK(e.uses(Expression::X));
  CHECK(e.uses(Expression::Y));
  CHECK_FALSE(e.uses(Expression::Z));
  CHECK(Expression::parse("-2^2").eval({}) == -4.0);
  CHECK(Expression::parse("2^3^2").eval({}) == 512.0);
  CHECK(Expression::parse("cos(pi)").eval({}) == doctest::Approx(-1.0));
  const auto d = Expression::parse("z*tanh(z) + 0.5*z^2").eval_derivative({0, 0, 0.7, 0}, Expression::Z);
  const double th = std::tanh(0.7);
  CHECK(d[0] == doctest::Approx(0.7 * th + 0.245));
  CHECK(d[1] == doctest::Approx(th + 0.7 * (1 - th * th) + 0.7));
}

TEST_CASE("expression parse errors carry the column") {
  auto column_of = [](const std::string& text, const std::string& allowed = "tyzx") {
    try {
      Expression::parse(text, allowed);
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      return e.column();
    }
    return std::size_t{0};
  };
  CHECK(column_of("1 + * 2") == 5);
  CHECK(column_of("foo(1)") == 1);
  CHECK(column_of("(1 + 2") == 7);
  CHECK(column_of("y + x", "x") == 1);
  CHECK(column_of("") == 1);
}

TEST_CASE("builtin generators") {
  CHECK(zero()(0.3, 1.0, 2.0) == 0.0);
  const Flags f = zero().flags();
  CHECK(f.y_independent);
  CHECK(f.convex_in_z);
  CHECK(f.deterministic);
  CHECK(f.satisfies_g0);
  CHECK(entropic(1.0)(0, 0, 2) == 2.0);
  CHECK(abs_drift(0.5)(0, 0, -2) == 1.0);
  CHECK(abs_drift(0.5).dz(0, 0, 0) == 0.0);
  CHECK(linear(0.3)(0, 5, 2) == doctest::Approx(0.6));
  CHECK(builtin(nlohmann::json{{"name", "entropic"}, {"gamma", 2.0}})(0, 0, 1) == 1.0);
  CHECK_THROWS_AS(builtin(nlohmann::json{{"name", "cubic"}}), InvalidArgument);
  CHECK_THROWS_AS(entropic(-1.0), InvalidArgument);
  CHECK_THROWS_AS(abs_drift(-0.1), InvalidArgument);
  const auto c = custom("y - t + 0.5*z^2");
  CHECK_FALSE(c.flags().y_independent);
  CHECK(c.flags().convex_in_z);
  CHECK(c(1.0, 2.0, 2.0) == doctest::Approx(3.0));
}

TEST_CASE("validate") {
  const auto ent = validate(entropic(1.0));
  CHECK(ent.all_pass());
  CHECK(entropic(1.0).k() == 0.5);
  // the derivative bound gamma|z| <= ell (1 + |z|) needs ell >= gamma
  CHECK(entropic(1.0).ell(3.0) == 1.0);
  CHECK(validate(linear(0.8)).passes("H3"));
  Lattice lat;
  lat.z_max = 10.0;
  const auto q = validate(custom("z^4", 1.0, "1"), lat);
  CHECK_FALSE(q.passes("H2"));
  CHECK(std::abs(q.status.at("H2").z) == 10.0);
  CHECK(q.status.at("H2").excess > 0.0);
}

TEST_CASE("shift_by_driver") {
  const Lattice lat{1.0, 5.0, 10.0, 5, 11, 11};
  bsde::DriverV none;
  const auto e = entropic(1.0);
  const auto e0 = shift_by_driver(e, none, 1.0);
  for_lattice(lat, [&](double t, double y, double z) { CHECK(e0(t, y, z) == e(t, y, z)); });

  bsde::DriverV v;
  v.density = [](double t, double) { return std::cos(t); };
  v.jumps = {{0.5, 1.0}};
  const auto l = linear(0.4);
  const auto ls = shift_by_driver(l, v, 1.0);
  for_lattice(lat, [&](double t, double y, double z) { CHECK(ls(t, y, z) == l(t, y, z)); });

  bsde::DriverV ramp;
  ramp.density = [](double, double) { return 1.0; };
  const auto gy = shift_by_driver(custom("y", 1.0, "1"), ramp, 1.0);
  CHECK(gy(1.0, 1.0, 0.3) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(gy(0.25, 1.0, 0.3) == doctest::Approx(0.75));

  bsde::DriverV state;
  state.density = [](double, double x) { return x; };
  state.state_dependent = true;
  CHECK_THROWS_AS(shift_by_driver(l, state, 1.0), InvalidArgument);
}

TEST_CASE("reflect and y_shift examples") {
  const auto r = reflect(entropic(2.0));
  CHECK(r(0, 0, 3.0) == doctest::Approx(-9.0));
  CHECK(reflect(linear(0.7))(0, 1, 2) == doctest::Approx(linear(0.7)(0, 1, 2)));
  CHECK(reflect(custom("y", 1.0, "1"))(0, 1.5, 9.0) == doctest::Approx(1.5));
  CHECK(y_shift(custom("y^2", 1.0, "1+2*x"), 1.0)(0, 2.0, 5.0) == doctest::Approx(1.0));
  const auto e = entropic(1.0);
  CHECK(y_shift(e, 0.0)(0.2, 1.0, 3.0) == e(0.2, 1.0, 3.0));
  CHECK(y_shift(e, 2.5)(0.2, 1.0, 3.0) == e(0.2, 1.0, 3.0));
}

TEST_CASE("property: reflect twice and opposite y-shifts are the identity") {
  const Lattice lat{1.0, 5.0, 10.0, 5, 11, 21};
  for (const auto& g : sample_generators()) {
    INFO(g.name());
    const auto rr = reflect(reflect(g));
    const auto ss = y_shift(y_shift(g, 0.75), -0.75);
    for_lattice(lat, [&](double t, double y, double z) {
      CHECK(std::abs(rr(t, y, z) - g(t, y, z)) <= 1e-14);
      CHECK(std::abs(ss(t, y, z) - g(t, y, z)) <= 1e-14 * std::max(1.0, std::abs(g(t, y, z))));
    });
  }
}

TEST_CASE("property: convex generators satisfy the scaling inequality") {
  const Lattice lat{1.0, 3.0, 6.0, 3, 7, 25};
  const std::vector<double> inside = {0.0, 0.1, 0.37, 0.5, 0.9, 1.0};
  const std::vector<double> outside = {-1.5, -0.2, 1.3, 2.0};
  for (const auto& g : sample_generators()) {
    if (!g.flags().convex_in_z) continue;
    INFO(g.name());
    for_lattice(lat, [&](double t, double y, double z) {
      const double g0 = g(t, y, 0.0);
      const double gz = g(t, y, z);
      const double tol = 1e-12 * (1.0 + std::abs(gz));
      for (double lam : inside) CHECK(g(t, y, lam * z) <= lam * gz + (1 - lam) * g0 + tol);
      for (double lam : outside) CHECK(g(t, y, lam * z) >= lam * gz + (1 - lam) * g0 - tol);
    });
  }
}

TEST_CASE("property: the g0 flag means g(t, y, 0) = 0 on the lattice") {
  const Lattice lat;
  int flagged = 0;
  for (const auto& g : sample_generators()) {
    if (!g.flags().satisfies_g0) continue;
    ++flagged;
    for_lattice(lat, [&](double t, double y, double) { CHECK(std::abs(g(t, y, 0.0)) <= 1e-14); });
  }
  CHECK(flagged >= 5);
  CHECK_FALSE(custom("y^2 + 0.5*z^2").flags().satisfies_g0);
}

TEST_CASE("property: the growth bound holds wherever the growth check passes") {
  const Lattice lat;
  for (const auto& g : sample_generators()) {
    const auto rep = validate(g, lat);
    if (!rep.passes("H2")) continue;
    INFO(g.name());
    for_lattice(lat, [&](double t, double y, double z) {
      const double v = g(t, y, z);
      REQUIRE(std::isfinite(v));
      CHECK(std::abs(v) <= g.k() + g.k() * std::abs(y) + g.ell(std::abs(y)) * z * z + 1e-9);
    });
  }
}
