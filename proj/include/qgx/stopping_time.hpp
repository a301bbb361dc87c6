#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qgx/paths.hpp"

namespace qgx::stochastic {

/// A stopping time with finitely many values on a TimeGrid.
///
/// The rule is Markovian: at each candidate step k (in increasing order) the
/// path stops if rule(k, B_{t_k}) holds; it always stops at the last
/// candidate. Every stopping time used by the checkers has this form.
class FiniteStoppingTime {
 public:
  using Rule = std::function<bool(std::size_t step, double x)>;

  FiniteStoppingTime(TimeGrid grid, std::vector<std::size_t> candidates, Rule rule,
                     std::string label);

  static FiniteStoppingTime deterministic(const TimeGrid& grid, std::size_t step);
  /// First candidate step with |B| >= level, capped at `cap_step`.
  static FiniteStoppingTime first_hitting(const TimeGrid& grid, double level,
                                          std::size_t cap_step);
  /// s1 where pred(B_{s1}) holds, otherwise s2.
  static FiniteStoppingTime two_valued(const TimeGrid& grid, std::size_t s1, std::size_t s2,
                                       std::function<bool(double)> pred, std::string label);

  const TimeGrid& grid() const noexcept { return grid_; }
  const std::vector<std::size_t>& candidates() const noexcept { return candidates_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t cap() const noexcept { return candidates_.back(); }

  /// Times the stopping time can take.
  std::vector<double> value_set() const;

  /// True when a path that has not stopped before `step` stops there at x.
  bool stops_at(std::size_t step, double x) const;
  bool is_candidate(std::size_t step) const noexcept;

  std::size_t stop_step(std::span<const double> positions) const;
  std::size_t stop_step(const PathView& path) const { return stop_step(path.positions); }
  std::vector<std::size_t> assign(const PathEnsemble& ensemble) const;

  /// Redraws increments after the stopping step on sample paths and throws
  /// ContractViolation if the stopping step moves.
  void check_adapted(const PathEnsemble& ensemble, std::size_t n_sample_paths = 16) const;

 private:
  TimeGrid grid_;
  std::vector<std::size_t> candidates_;
  Rule rule_;
  std::string label_;
};

}  // namespace qgx::stochastic
