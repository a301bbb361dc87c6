#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "qgx/driver.hpp"

namespace qgx::generators {

struct Flags {
  bool y_independent = false;
  bool convex_in_z = false;
  bool deterministic = true;
  bool satisfies_g0 = false;
};

/// A generator g(t, y, z) with its growth metadata (k, ell): the combined
/// growth form |g| <= k + k|y| + ell(|y|) z^2 and |dg/dz| <= ell(|y|)(1+|z|).
class Generator {
 public:
  using Fn = std::function<double(double t, double y, double z)>;

  /// An empty dz or dy is replaced by a central difference and flagged.
  Generator(std::string name, Fn eval, Fn dz, Fn dy, double k,
            std::function<double(double)> ell, Flags flags, nlohmann::json spec);

  double operator()(double t, double y, double z) const { return eval_(t, y, z); }
  double dz(double t, double y, double z) const { return dz_(t, y, z); }
  double dy(double t, double y, double z) const { return dy_(t, y, z); }

  const std::string& name() const noexcept { return name_; }
  double k() const noexcept { return k_; }
  double ell(double r) const { return ell_(r); }
  const std::function<double(double)>& ell_fn() const noexcept { return ell_; }
  const Flags& flags() const noexcept { return flags_; }
  const nlohmann::json& spec() const noexcept { return spec_; }
  bool dz_closed_form() const noexcept { return dz_closed_; }
  bool dy_closed_form() const noexcept { return dy_closed_; }

  const Fn& eval_fn() const noexcept { return eval_; }
  const Fn& dz_fn() const noexcept { return dz_; }
  const Fn& dy_fn() const noexcept { return dy_; }

 private:
  std::string name_;
  Fn eval_;
  Fn dz_;
  Fn dy_;
  double k_;
  std::function<double(double)> ell_;
  Flags flags_;
  nlohmann::json spec_;
  bool dz_closed_ = true;
  bool dy_closed_ = true;
};

Generator zero();
Generator linear(double a);
Generator entropic(double gamma);
/// mu |z|; dz(0) is taken as 0.
Generator abs_drift(double mu);
/// Expression over t, y, z. ell may be a constant or an expression in x
/// (read as the argument r of ell).
Generator custom(const std::string& expr, double k = 1.0, const std::string& ell = "1");

/// {"name": "...", params...}; names zero, linear(a), entropic(gamma),
/// abs_drift(mu), custom(expr, k, ell). Throws InvalidArgument on unknown
/// names or bad parameters.
Generator builtin(const nlohmann::json& spec);
Generator builtin(const std::string& name, const nlohmann::json& params = nlohmann::json::object());

/// g~(t,y,z) = g(t, y - V_t, z). V must be bounded and state independent.
Generator shift_by_driver(const Generator& gen, const bsde::DriverV& v, double T);
/// g^-(t,y,z) = -g(t,-y,-z).
Generator reflect(const Generator& gen);
/// g^c(t,y,z) = g(t, y - c, z).
Generator y_shift(const Generator& gen, double c);
/// z-convolution with a smooth bump of the given radius; keeps k and ell.
Generator mollify(const Generator& gen, double radius);

/// Lattice probes behind the structural flags.
bool detect_g0(const Generator::Fn& g, double T);
bool detect_convex_in_z(const Generator::Fn& g, double T);

}  // namespace qgx::generators
