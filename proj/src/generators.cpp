#include "qgx/generators.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "qgx/errors.hpp"
#include "qgx/expression.hpp"
#include "qgx/quadrature.hpp"

namespace qgx::generators {

using nlohmann::json;

namespace {

constexpr double kFdStep = 1e-6;

Generator::Fn central_dz(Generator::Fn g) {
  return [g](double t, double y, double z) {
    const double h = kFdStep * std::max(1.0, std::abs(z));
    return (g(t, y, z + h) - g(t, y, z - h)) / (2.0 * h);
  };
}

Generator::Fn central_dy(Generator::Fn g) {
  return [g](double t, double y, double z) {
    const double h = kFdStep * std::max(1.0, std::abs(y));
    return (g(t, y + h, z) - g(t, y - h, z)) / (2.0 * h);
  };
}

double finite_param(const json& params, const char* key, double fallback, bool required) {
  if (!params.contains(key)) {
    if (required) throw InvalidArgument(std::string("generator: missing parameter '") + key + "'");
    return fallback;
  }
  if (!params.at(key).is_number()) {
    throw InvalidArgument(std::string("generator: parameter '") + key + "' must be a number");
  }
  const double v = params.at(key).get<double>();
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string("generator: parameter '") + key + "' must be finite");
  }
  return v;
}

std::function<double(double)> constant_ell(double c) {
  return [c](double) { return c; };
}

const double kProbeT[] = {0.0, 0.5, 1.0};

}  // namespace

Generator::Generator(std::string name, Fn eval, Fn dz, Fn dy, double k,
                     std::function<double(double)> ell, Flags flags, json spec)
    : name_(std::move(name)), eval_(std::move(eval)), dz_(std::move(dz)), dy_(std::move(dy)),
      k_(k), ell_(std::move(ell)), flags_(flags), spec_(std::move(spec)) {
  if (!eval_) throw InvalidArgument("Generator: missing evaluation function");
  if (!(k_ > 0.0) || !std::isfinite(k_)) throw InvalidArgument("Generator: k must be positive");
  if (!ell_) throw InvalidArgument("Generator: missing ell");
  if (!dz_) {
    dz_ = central_dz(eval_);
    dz_closed_ = false;
  }
  if (!dy_) {
    dy_ = central_dy(eval_);
    dy_closed_ = false;
  }
}

Generator zero() {
  auto z0 = [](double, double, double) { return 0.0; };
  return Generator("zero", z0, z0, z0, 0.5, constant_ell(0.0), {true, true, true, true},
                   json{{"name", "zero"}});
}

Generator linear(double a) {
  if (!std::isfinite(a)) throw InvalidArgument("linear: a must be finite");
  return Generator(
      "linear", [a](double, double, double z) { return a * z; },
      [a](double, double, double) { return a; }, [](double, double, double) { return 0.0; },
      std::max(0.5, 0.5 * std::abs(a)), constant_ell(std::abs(a)), {true, true, true, true},
      json{{"name", "linear"}, {"a", a}});
}

Generator entropic(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw InvalidArgument("entropic: gamma must be positive");
  }
  // ell = gamma covers both |g| <= ell z^2 and |g_z| = gamma|z| <= ell (1+|z|)
  return Generator(
      "entropic", [gamma](double, double, double z) { return 0.5 * gamma * z * z; },
      [gamma](double, double, double z) { return gamma * z; },
      [](double, double, double) { return 0.0; }, 0.5 * gamma, constant_ell(gamma),
      {true, true, true, true}, json{{"name", "entropic"}, {"gamma", gamma}});
}

Generator abs_drift(double mu) {
  if (!(mu >= 0.0) || !std::isfinite(mu)) throw InvalidArgument("abs_drift: mu must be >= 0");
  return Generator(
      "abs_drift", [mu](double, double, double z) { return mu * std::abs(z); },
      [mu](double, double, double z) { return z > 0.0 ? mu : (z < 0.0 ? -mu : 0.0); },
      [](double, double, double) { return 0.0; }, std::max(0.5, 0.5 * mu), constant_ell(mu),
      {true, true, true, true}, json{{"name", "abs_drift"}, {"mu", mu}});
}

Generator custom(const std::string& text, double k, const std::string& ell_text) {
  auto e = std::make_shared<const Expression>(Expression::parse(text, "tyz"));
  auto le = std::make_shared<const Expression>(Expression::parse(ell_text, "x"));
  Generator::Fn f = [e](double t, double y, double z) { return e->eval({t, y, z, 0.0}); };
  Generator::Fn fz = [e](double t, double y, double z) {
    return e->eval_derivative({t, y, z, 0.0}, Expression::Z)[1];
  };
  Generator::Fn fy = [e](double t, double y, double z) {
    return e->eval_derivative({t, y, z, 0.0}, Expression::Y)[1];
  };
  auto ell = [le](double r) { return le->eval({0.0, 0.0, 0.0, r}); };
  Flags flags;
  flags.y_independent = !e->uses(Expression::Y);
  flags.deterministic = true;
  flags.satisfies_g0 = detect_g0(f, 1.0);
  flags.convex_in_z = detect_convex_in_z(f, 1.0);
  return Generator("custom", f, fz, fy, k, ell, flags,
                   json{{"name", "custom"}, {"expr", text}, {"k", k}, {"ell", ell_text}});
}

Generator builtin(const json& spec) {
  if (!spec.is_object() || !spec.contains("name") || !spec.at("name").is_string()) {
    throw InvalidArgument("generator spec must be an object with a string 'name'");
  }
  return builtin(spec.at("name").get<std::string>(), spec);
}

Generator builtin(const std::string& name, const json& params) {
  if (name == "zero") return zero();
  if (name == "linear") return linear(finite_param(params, "a", 0.0, true));
  if (name == "entropic") return entropic(finite_param(params, "gamma", 1.0, true));
  if (name == "abs_drift") return abs_drift(finite_param(params, "mu", 0.0, true));
  if (name == "custom") {
    if (!params.contains("expr") || !params.at("expr").is_string()) {
      throw InvalidArgument("custom generator needs a string 'expr'");
    }
    std::string ell = "1";
    if (params.contains("ell")) {
      const auto& l = params.at("ell");
      if (l.is_string()) {
        ell = l.get<std::string>();
      } else if (l.is_number()) {
        ell = l.dump();
      } else {
        throw InvalidArgument("custom generator: 'ell' must be a number or expression");
      }
    }
    return custom(params.at("expr").get<std::string>(), finite_param(params, "k", 1.0, false),
                  ell);
  }
  throw InvalidArgument("unknown generator '" + name + "'");
}

Generator shift_by_driver(const Generator& gen, const bsde::DriverV& v, double T) {
  if (v.state_dependent) {
    throw InvalidArgument("shift_by_driver: V must not depend on the state");
  }
  if (!(T > 0.0)) throw InvalidArgument("shift_by_driver: T must be positive");
  const double vsup = v.sup_norm(T);
  if (!std::isfinite(vsup)) {
    throw InvalidArgument("shift_by_driver: V is unbounded");
  }
  // V tabulated once (continuous part linear between nodes, jumps exact)
  constexpr int kTable = 4096;
  auto table = std::make_shared<std::vector<double>>(kTable + 1);
  bsde::DriverV cont = v;
  cont.jumps.clear();
  for (int i = 0; i <= kTable; ++i) (*table)[i] = cont.value(T * i / kTable);
  auto jumps = std::make_shared<std::vector<bsde::Jump>>(v.jumps);
  auto vt = [table, jumps, T](double t) {
    const double s = std::clamp(t / T, 0.0, 1.0) * kTable;
    const int i = std::min(static_cast<int>(s), kTable - 1);
    const double w = s - i;
    double val = w == 0.0 ? (*table)[i] : (1.0 - w) * (*table)[i] + w * (*table)[i + 1];
    for (const auto& j : *jumps) {
      if (j.time <= t) val += j.size;
    }
    return val;
  };
  auto f = gen.eval_fn();
  auto fz = gen.dz_fn();
  auto fy = gen.dy_fn();
  auto ell = gen.ell_fn();
  json spec = {{"name", "shift_by_driver"}, {"base", gen.spec()}, {"sup_v", vsup}};
  return Generator(
      gen.name() + "~V", [f, vt](double t, double y, double z) { return f(t, y - vt(t), z); },
      [fz, vt](double t, double y, double z) { return fz(t, y - vt(t), z); },
      [fy, vt](double t, double y, double z) { return fy(t, y - vt(t), z); },
      gen.k() * (1.0 + vsup), [ell, vsup](double r) { return ell(r + vsup); },
      {gen.flags().y_independent, gen.flags().convex_in_z, true, gen.flags().satisfies_g0},
      spec);
}

Generator reflect(const Generator& gen) {
  auto f = gen.eval_fn();
  auto fz = gen.dz_fn();
  auto fy = gen.dy_fn();
  Generator::Fn g = [f](double t, double y, double z) { return -f(t, -y, -z); };
  Flags flags = gen.flags();
  flags.convex_in_z = detect_convex_in_z(g, 1.0);
  return Generator(
      gen.name() + "^-", g, [fz](double t, double y, double z) { return fz(t, -y, -z); },
      [fy](double t, double y, double z) { return fy(t, -y, -z); }, gen.k(), gen.ell_fn(), flags,
      json{{"name", "reflect"}, {"base", gen.spec()}});
}

Generator y_shift(const Generator& gen, double c) {
  if (!std::isfinite(c)) throw InvalidArgument("y_shift: c must be finite");
  auto f = gen.eval_fn();
  auto fz = gen.dz_fn();
  auto fy = gen.dy_fn();
  auto ell = gen.ell_fn();
  const double ac = std::abs(c);
  return Generator(
      gen.name() + "^c", [f, c](double t, double y, double z) { return f(t, y - c, z); },
      [fz, c](double t, double y, double z) { return fz(t, y - c, z); },
      [fy, c](double t, double y, double z) { return fy(t, y - c, z); }, gen.k() * (1.0 + ac),
      [ell, ac](double r) { return ell(r + ac); }, gen.flags(),
      json{{"name", "y_shift"}, {"c", c}, {"base", gen.spec()}});
}

Generator mollify(const Generator& gen, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw InvalidArgument("mollify: radius must be >= 0");
  }
  if (radius == 0.0) return gen;
  // bump exp(-1/(1-s^2)) on (-1,1), normalized on the quadrature nodes
  const auto rule = stochastic::gauss_legendre(16);
  auto nodes = std::make_shared<std::vector<double>>();
  auto weights = std::make_shared<std::vector<double>>();
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double s = rule.nodes[i];
    const double w = rule.weights[i] * std::exp(-1.0 / (1.0 - s * s));
    nodes->push_back(radius * s);
    weights->push_back(w);
    total += w;
  }
  for (double& w : *weights) w /= total;
  auto smooth = [nodes, weights](Generator::Fn h) -> Generator::Fn {
    return [h, nodes, weights](double t, double y, double z) {
      double acc = 0.0;
      for (std::size_t i = 0; i < nodes->size(); ++i) acc += (*weights)[i] * h(t, y, z - (*nodes)[i]);
      return acc;
    };
  };
  Generator::Fn g = smooth(gen.eval_fn());
  Flags flags = gen.flags();
  flags.satisfies_g0 = detect_g0(g, 1.0);
  return Generator(gen.name() + "*rho", g, smooth(gen.dz_fn()), smooth(gen.dy_fn()), gen.k(),
                   gen.ell_fn(), flags,
                   json{{"name", "mollify"}, {"radius", radius}, {"base", gen.spec()}});
}

bool detect_g0(const Generator::Fn& g, double T) {
  for (double tf : kProbeT) {
    for (int i = 0; i <= 20; ++i) {
      const double y = -5.0 + 0.5 * i;
      if (!(std::abs(g(tf * T, y, 0.0)) <= 1e-14)) return false;
    }
  }
  return true;
}

bool detect_convex_in_z(const Generator::Fn& g, double T) {
  constexpr int nz = 41;
  double vals[nz];
  for (double tf : kProbeT) {
    for (double y : {-5.0, -1.0, 0.0, 1.0, 5.0}) {
      for (int j = 0; j < nz; ++j) vals[j] = g(tf * T, y, -10.0 + 0.5 * j);
      for (int a = 0; a < nz; ++a) {
        for (int b = a + 2; b < nz; b += 2) {
          const double mid = vals[(a + b) / 2];
          const double chord = 0.5 * (vals[a] + vals[b]);
          const double tol = 1e-12 * (1.0 + std::abs(vals[a]) + std::abs(vals[b]));
          if (!(mid <= chord + tol)) return false;
        }
      }
    }
  }
  return true;
}

}  // namespace qgx::generators
