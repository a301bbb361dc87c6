#include "qgx/stopping_time.hpp"

#include <algorithm>
#include <cmath>

#include "qgx/errors.hpp"

namespace qgx::stochastic {

FiniteStoppingTime::FiniteStoppingTime(TimeGrid grid, std::vector<std::size_t> candidates,
                                       Rule rule, std::string label)
    : grid_(grid), candidates_(std::move(candidates)), rule_(std::move(rule)),
      label_(std::move(label)) {
  if (candidates_.empty()) {
    throw InvalidArgument("FiniteStoppingTime: empty value set");
  }
  if (!std::is_sorted(candidates_.begin(), candidates_.end()) ||
      std::adjacent_find(candidates_.begin(), candidates_.end()) != candidates_.end()) {
    throw InvalidArgument("FiniteStoppingTime: candidate steps must be strictly increasing");
  }
  if (candidates_.back() > grid_.n_steps()) {
    throw InvalidArgument("FiniteStoppingTime: candidate step beyond the grid");
  }
  if (!rule_) {
    throw InvalidArgument("FiniteStoppingTime: missing rule");
  }
}

FiniteStoppingTime FiniteStoppingTime::deterministic(const TimeGrid& grid, std::size_t step) {
  return FiniteStoppingTime(
      grid, {step}, [](std::size_t, double) { return true; },
      "deterministic(t=" + std::to_string(grid.node(step)) + ")");
}

FiniteStoppingTime FiniteStoppingTime::first_hitting(const TimeGrid& grid, double level,
                                                     std::size_t cap_step) {
  if (!(level > 0.0)) {
    throw InvalidArgument("first_hitting: level must be positive");
  }
  std::vector<std::size_t> c(cap_step + 1);
  for (std::size_t i = 0; i <= cap_step; ++i) c[i] = i;
  return FiniteStoppingTime(
      grid, std::move(c), [level](std::size_t, double x) { return std::abs(x) >= level; },
      "first_hitting(|B|>=" + std::to_string(level) + ")");
}

FiniteStoppingTime FiniteStoppingTime::two_valued(const TimeGrid& grid, std::size_t s1,
                                                  std::size_t s2,
                                                  std::function<bool(double)> pred,
                                                  std::string label) {
  if (s1 >= s2) {
    throw InvalidArgument("two_valued: need s1 < s2");
  }
  return FiniteStoppingTime(
      grid, {s1, s2},
      [s1, pred = std::move(pred)](std::size_t step, double x) { return step == s1 && pred(x); },
      std::move(label));
}

std::vector<double> FiniteStoppingTime::value_set() const {
  std::vector<double> out;
  out.reserve(candidates_.size());
  for (auto s : candidates_) out.push_back(grid_.node(s));
  return out;
}

bool FiniteStoppingTime::is_candidate(std::size_t step) const noexcept {
  return std::binary_search(candidates_.begin(), candidates_.end(), step);
}

bool FiniteStoppingTime::stops_at(std::size_t step, double x) const {
  if (!is_candidate(step)) return false;
  return step == cap() || rule_(step, x);
}

std::size_t FiniteStoppingTime::stop_step(std::span<const double> positions) const {
  for (auto s : candidates_) {
    if (s == cap() || rule_(s, positions[s])) {
      return s;
    }
  }
  return cap();
}

std::vector<std::size_t> FiniteStoppingTime::assign(const PathEnsemble& ensemble) const {
  if (!(ensemble.grid() == grid_)) {
    throw InvalidArgument("FiniteStoppingTime: ensemble grid differs from the stopping grid");
  }
  std::vector<std::size_t> out(ensemble.n_paths());
  for (std::size_t p = 0; p < ensemble.n_paths(); ++p) {
    out[p] = stop_step(ensemble.path(p));
  }
  return out;
}

void FiniteStoppingTime::check_adapted(const PathEnsemble& ensemble,
                                       std::size_t n_sample_paths) const {
  const std::size_t np = std::min(n_sample_paths, ensemble.n_paths());
  for (std::size_t k = 0; k < np; ++k) {
    const std::size_t p = k * ensemble.n_paths() / np;
    const PathView v = ensemble.path(p);
    const std::size_t s = stop_step(v);
    const std::vector<double> pos = perturbed_positions(v, s, 0x5707ull + k);
    if (stop_step(std::span<const double>(pos)) != s) {
      throw ContractViolation("FiniteStoppingTime '" + label_ +
                              "' looks past its value on path " + std::to_string(p));
    }
  }
}

}  // namespace qgx::stochastic
