#include "qgx/bmo.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <utility>

#include "qgx/errors.hpp"
#include "qgx/random.hpp"

namespace qgx::stochastic {

namespace {

double conditional_energy(const GridField& z, const TimeGrid& grid, std::size_t step, double x,
                          const BmoOptions& opt) {
  const std::size_t n = grid.n_steps();
  if (step == n) return 0.0;
  const double dt = grid.dt();
  const double sd = std::sqrt(dt);
  const std::uint64_t key =
      derive_seed(derive_seed(opt.seed, step), std::bit_cast<std::uint64_t>(x));
  double total = 0.0;
  for (std::size_t m = 0; m < opt.n_subpaths; ++m) {
    double b = x;
    double acc = 0.0;
    for (std::size_t i = step; i < n; ++i) {
      const double zi = z.interpolate(grid.node(i), b);
      acc += zi * zi * dt;
      b += sd * standard_normal(key, m, i);
    }
    total += acc;
  }
  return total / static_cast<double>(opt.n_subpaths);
}

}  // namespace

BmoEstimate bmo_estimate(const GridField& z, const PathEnsemble& ensemble,
                         const std::vector<FiniteStoppingTime>& family,
                         const BmoOptions& options) {
  if (family.empty()) {
    throw InvalidArgument("bmo_estimate: empty stopping-time family");
  }
  if (options.n_subpaths == 0) {
    throw InvalidArgument("bmo_estimate: n_subpaths must be positive");
  }
  const TimeGrid& grid = ensemble.grid();
  std::map<std::pair<std::size_t, std::uint64_t>, double> cache;
  BmoEstimate out;
  out.per_member.reserve(family.size());
  for (std::size_t f = 0; f < family.size(); ++f) {
    const auto steps = family[f].assign(ensemble);
    double worst = 0.0;
    for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
      const double x = ensemble.position(p, steps[p]);
      const auto key = std::make_pair(steps[p], std::bit_cast<std::uint64_t>(x));
      auto it = cache.find(key);
      if (it == cache.end()) {
        const double e = conditional_energy(z, grid, steps[p], x, options);
        if (!std::isfinite(e)) {
          throw NumericError("bmo_estimate: z not finite along re-simulated paths");
        }
        it = cache.emplace(key, e).first;
      }
      worst = std::max(worst, it->second);
    }
    out.per_member.push_back(worst);
    if (worst > out.value || f == 0) {
      out.value = std::max(out.value, worst);
      if (worst >= out.value) out.argmax = f;
    }
  }
  return out;
}

std::vector<FiniteStoppingTime> default_bmo_family(const TimeGrid& grid) {
  std::vector<FiniteStoppingTime> fam;
  for (std::size_t i = 0; i <= grid.n_steps(); ++i) {
    fam.push_back(FiniteStoppingTime::deterministic(grid, i));
  }
  const double s = std::sqrt(grid.length());
  for (double level : {0.5 * s, 1.0 * s, 1.5 * s}) {
    fam.push_back(FiniteStoppingTime::first_hitting(grid, level, grid.n_steps()));
  }
  return fam;
}

}  // namespace qgx::stochastic
