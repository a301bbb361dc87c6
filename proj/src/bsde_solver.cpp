#include "qgx/bsde_solver.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include "qgx/errors.hpp"
#include "qgx/expression.hpp"

namespace qgx::bsde {

namespace {

struct Lateral {
  bool dirichlet = false;
  double left = 0.0;
  double right = 0.0;
};

class Tridiagonal {
 public:
  // interior rows: -r u_{j-1} + (1+2r) u_j - r u_{j+1}; end rows are identity
  Tridiagonal(std::size_t n, double r) : n_(n), r_(r), cp_(n), inv_(n) {
    cp_[0] = 0.0;
    inv_[0] = 1.0;
    for (std::size_t j = 1; j + 1 < n; ++j) {
      const double denom = (1.0 + 2.0 * r) + r * cp_[j - 1];
      inv_[j] = 1.0 / denom;
      cp_[j] = -r * inv_[j];
    }
    cp_[n - 1] = 0.0;
    inv_[n - 1] = 1.0;
  }

  void solve(const std::vector<double>& d, std::vector<double>& x) const {
    x[0] = d[0];
    for (std::size_t j = 1; j + 1 < n_; ++j) x[j] = (d[j] + r_ * x[j - 1]) * inv_[j];
    x[n_ - 1] = d[n_ - 1];
    for (std::size_t j = n_ - 1; j-- > 0;) x[j] -= cp_[j] * x[j + 1];
  }

 private:
  std::size_t n_;
  double r_;
  std::vector<double> cp_;
  std::vector<double> inv_;
};

std::map<std::size_t, double> jump_table(const DriverV* driver, const TimeGrid& tg) {
  std::map<std::size_t, double> out;
  if (driver == nullptr) return out;
  for (const Jump& j : driver->jumps) {
    if (!std::isfinite(j.time) || !std::isfinite(j.size)) {
      throw InvalidArgument("DriverV: jump time and size must be finite");
    }
    if (j.time <= tg.t0() || j.time > tg.t_end() + 1e-12) continue;
    if (!tg.contains_node(j.time)) {
      throw InvalidArgument("DriverV: jump time " + std::to_string(j.time) +
                            " is not a time-grid node");
    }
    out[tg.index_of(j.time)] += j.size;
  }
  return out;
}

void fill_gradient(const GridField& u, GridField& v) {
  const auto& xg = u.xgrid();
  const std::size_t n = xg.size();
  const double inv2dx = 1.0 / (2.0 * xg.dx());
  for (std::size_t i = 0; i <= u.tgrid().n_steps(); ++i) {
    auto w = u.row(i);
    auto z = v.row(i);
    for (std::size_t j = 1; j + 1 < n; ++j) z[j] = (w[j + 1] - w[j - 1]) * inv2dx;
    z[0] = (-3.0 * w[0] + 4.0 * w[1] - w[2]) * inv2dx;
    z[n - 1] = (3.0 * w[n - 1] - 4.0 * w[n - 2] + w[n - 3]) * inv2dx;
  }
}

ValueSurface run(const Generator& gen, std::vector<double> terminal, double terminal_bound,
                 const TimeGrid& tg, const SpaceGrid& xg, const DriverV* driver,
                 const SolverOptions& opt, const Lateral& lateral, const std::string& scheme) {
  const std::size_t n = xg.size();
  if (terminal.size() != n) {
    throw InvalidArgument("solve: terminal values do not match the space grid");
  }
  if (!(opt.tolerance > 0.0) || opt.max_iterations == 0 || !(opt.damping > 0.0) ||
      opt.damping > 1.0 || !(opt.fallback_damping > 0.0) || opt.fallback_damping > 1.0) {
    throw InvalidArgument("solve: bad solver options");
  }
  double m_phi = 0.0;
  for (double v : terminal) {
    if (!std::isfinite(v)) throw InvalidArgument("solve: terminal value not finite");
    m_phi = std::max(m_phi, std::abs(v));
  }
  if (lateral.dirichlet) {
    m_phi = std::max({m_phi, std::abs(lateral.left), std::abs(lateral.right)});
  }
  if (std::isfinite(terminal_bound)) m_phi = std::max(m_phi, terminal_bound);

  const auto jumps = jump_table(driver, tg);
  const bool has_density = driver != nullptr && static_cast<bool>(driver->density);
  const bool state_density = has_density && driver->state_dependent;

  GridField u(tg, xg);
  GridField v(tg, xg);
  SolveMetadata meta;
  meta.scheme = scheme;

  const double dt = tg.dt();
  const double dx = xg.dx();
  const Tridiagonal tri(n, 0.5 * dt / (dx * dx));
  const std::vector<double> xs = xg.nodes();

  auto last = u.row(tg.n_steps());
  std::copy(terminal.begin(), terminal.end(), last.begin());

  std::vector<double> next(n), w(n), w_new(n), rhs(n), dens(n, 0.0);
  const double inv2dx = 1.0 / (2.0 * dx);
  const double cap = opt.z_cap;

  auto source = [&](double t, std::size_t j, const std::vector<double>& s) {
    double z;
    if (j == 0) {
      z = (s[1] - s[0]) / dx;
    } else if (j + 1 == n) {
      z = (s[n - 1] - s[n - 2]) / dx;
    } else {
      const double zc = (s[j + 1] - s[j - 1]) * inv2dx;
      const double b = gen.dz(t, s[j], std::clamp(zc, -cap, cap));
      if (std::abs(b) * dx <= 1.0) {
        z = zc;
      } else if (b > 0.0) {
        z = (s[j + 1] - s[j]) / dx;
      } else {
        z = (s[j] - s[j - 1]) / dx;
      }
    }
    if (std::abs(z) > cap) {
      meta.z_clamped = true;
      z = std::clamp(z, -cap, cap);
    }
    return gen(t, s[j], z);
  };

  for (std::size_t i = tg.n_steps(); i-- > 0;) {
    const auto prev = u.row(i + 1);
    std::copy(prev.begin(), prev.end(), next.begin());
    if (auto it = jumps.find(i + 1); it != jumps.end()) {
      for (double& val : next) val += it->second;
    }
    const double t = tg.node(i);
    if (has_density) {
      const double tm = 0.5 * (tg.node(i) + tg.node(i + 1));
      for (std::size_t j = 0; j < n; ++j) {
        dens[j] = driver->density(tm, state_density ? xs[j] : 0.0);
      }
    }
    w = next;
    double omega = opt.damping;
    double prev_res = std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t it = 0;
    for (; it < opt.max_iterations; ++it) {
      for (std::size_t j = 0; j < n; ++j) rhs[j] = next[j] + dt * (source(t, j, w) + dens[j]);
      if (lateral.dirichlet) {
        rhs[0] = lateral.left;
        rhs[n - 1] = lateral.right;
      }
      tri.solve(rhs, w_new);
      double res = 0.0;
      for (std::size_t j = 0; j < n; ++j) res = std::max(res, std::abs(w_new[j] - w[j]));
      if (!std::isfinite(res)) break;
      if (res <= opt.tolerance) {
        w.swap(w_new);
        meta.max_residual = std::max(meta.max_residual, res);
        converged = true;
        break;
      }
      if (res > prev_res && omega != opt.fallback_damping) {
        omega = opt.fallback_damping;
        ++meta.damped_steps;
      }
      prev_res = res;
      for (std::size_t j = 0; j < n; ++j) w[j] += omega * (w_new[j] - w[j]);
    }
    if (!converged) {
      throw SolverDiverged("solve: inner iteration did not converge at time step " +
                               std::to_string(i) + " (t=" + std::to_string(t) + ")",
                           i);
    }
    meta.total_iterations += it + 1;
    meta.max_step_iterations = std::max(meta.max_step_iterations, it + 1);
    auto row = u.row(i);
    std::copy(w.begin(), w.end(), row.begin());
  }

  double tv = 0.0;
  if (driver != nullptr) {
    std::vector<double> states;
    const std::size_t stride = std::max<std::size_t>(1, n / 100);
    for (std::size_t j = 0; j < n; j += stride) states.push_back(xs[j]);
    states.push_back(xs[n - 1]);
    tv = driver->total_variation(tg.t0(), tg.t_end(), states);
  }
  const double L = tg.length();
  meta.a_priori_bound = (m_phi + tv + gen.k() * L) * std::exp(gen.k() * L);
  meta.sup_u = u.sup_norm();
  if (opt.enforce_bound && meta.sup_u > meta.a_priori_bound * (1.0 + opt.bound_slack)) {
    throw InstabilityError("solve: sup|u| = " + std::to_string(meta.sup_u) +
                           " exceeds the a priori bound " + std::to_string(meta.a_priori_bound));
  }
  fill_gradient(u, v);
  return ValueSurface{std::move(u), std::move(v), meta};
}

}  // namespace

TerminalCondition TerminalCondition::expression(const std::string& text) {
  auto e = std::make_shared<const Expression>(Expression::parse(text, "x"));
  return TerminalCondition{[e](double x) { return e->eval({0.0, 0.0, 0.0, x}); },
                           std::numeric_limits<double>::quiet_NaN(), text};
}

TerminalCondition TerminalCondition::constant(double c) {
  return TerminalCondition{[c](double) { return c; }, std::abs(c), std::to_string(c)};
}

TerminalCondition TerminalCondition::function(std::function<double(double)> f,
                                              std::string description) {
  return TerminalCondition{std::move(f), std::numeric_limits<double>::quiet_NaN(),
                           std::move(description)};
}

ValueSurface solve(const Generator& gen, const TerminalCondition& terminal, const TimeGrid& tgrid,
                   const SpaceGrid& xgrid, const DriverV* driver, const SolverOptions& options) {
  if (!terminal.phi) throw InvalidArgument("solve: missing terminal function");
  std::vector<double> vals(xgrid.size());
  for (std::size_t j = 0; j < xgrid.size(); ++j) vals[j] = terminal.phi(xgrid.node(j));
  return solve_values(gen, std::move(vals), tgrid, xgrid, driver, options, terminal.bound);
}

ValueSurface solve_values(const Generator& gen, std::vector<double> terminal,
                          const TimeGrid& tgrid, const SpaceGrid& xgrid, const DriverV* driver,
                          const SolverOptions& options, double terminal_bound) {
  return run(gen, std::move(terminal), terminal_bound, tgrid, xgrid, driver, options, Lateral{},
             "implicit-euler/picard/natural-boundary");
}

ValueSurface solve_stopped(const Generator& gen, const TimeGrid& tgrid, double x_c, double r,
                           AffineData data, double dx, const SolverOptions& options) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidArgument("solve_stopped: radius must be positive");
  if (!(dx > 0.0)) throw InvalidArgument("solve_stopped: dx must be positive");
  if (r < 4.0 * dx) {
    throw GridTooCoarse("solve_stopped: radius " + std::to_string(r) +
                        " is below 4 grid spacings (dx=" + std::to_string(dx) + ")");
  }
  if (!std::isfinite(data.y) || !std::isfinite(data.z) || !std::isfinite(x_c)) {
    throw InvalidArgument("solve_stopped: affine data must be finite");
  }
  const auto half = static_cast<std::size_t>(std::ceil(r / dx - 1e-9));
  const SpaceGrid xg(-r, r, 2 * half + 1);
  std::vector<double> terminal(xg.size());
  for (std::size_t j = 0; j < xg.size(); ++j) terminal[j] = data.y + data.z * xg.node(j);
  Lateral lat{true, data.y - data.z * r, data.y + data.z * r};
  return run(gen, std::move(terminal), std::numeric_limits<double>::quiet_NaN(), tgrid, xg,
             nullptr, options, lat, "implicit-euler/picard/dirichlet");
}

SpaceGrid default_space_grid(const std::function<double(double)>& phi, double T,
                             std::size_t n_points) {
  if (!(T > 0.0)) throw InvalidArgument("default_space_grid: T must be positive");
  const double lo = phi(-50.0);
  const double hi = phi(50.0);
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw InvalidArgument("default_space_grid: terminal not finite in the far field");
  }
  double w = 0.0;
  for (int k = 0; k <= 5000; ++k) {
    const double x = 0.01 * k;
    if (std::abs(phi(x) - hi) > 1e-8 || std::abs(phi(-x) - lo) > 1e-8) w = x;
  }
  return SpaceGrid::symmetric(6.0 * std::sqrt(T) + w + 0.01, n_points);
}

Extrapolation extrapolate(const std::vector<double>& levels, double ratio) {
  if (levels.size() < 3) throw InvalidArgument("extrapolate: need at least 3 levels");
  if (!(ratio > 1.0)) throw InvalidArgument("extrapolate: ratio must exceed 1");
  Extrapolation out;
  out.levels = levels;
  out.finest = levels.back();
  std::vector<double> d;
  for (std::size_t k = 1; k < levels.size(); ++k) d.push_back(levels[k] - levels[k - 1]);
  if (std::all_of(d.begin(), d.end(), [](double x) { return x == 0.0; })) {
    out.value = levels.back();
    out.order = std::numeric_limits<double>::infinity();
    return out;
  }
  for (std::size_t k = 1; k < d.size(); ++k) {
    if (!(std::abs(d[k]) < std::abs(d[k - 1])) || d[k] * d[k - 1] < 0.0) {
      throw NoConvergence("extrapolate: refinement differences are not monotone");
    }
  }
  const double d1 = d[d.size() - 2];
  const double d2 = d.back();
  if (d2 == 0.0) {
    out.value = levels.back();
    out.order = std::numeric_limits<double>::infinity();
    return out;
  }
  out.order = std::log(std::abs(d1 / d2)) / std::log(ratio);
  out.value = levels.back() + d2 / (std::pow(ratio, out.order) - 1.0);
  return out;
}

Extrapolation refine_and_extrapolate(const std::function<double(int)>& problem, int n_levels,
                                     double ratio) {
  if (n_levels < 3) throw InvalidArgument("refine_and_extrapolate: need at least 3 levels");
  std::vector<double> levels;
  for (int l = 0; l < n_levels; ++l) levels.push_back(problem(l));
  return extrapolate(levels, ratio);
}

}  // namespace qgx::bsde
