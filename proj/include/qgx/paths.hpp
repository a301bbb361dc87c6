#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qgx/grid.hpp"

namespace qgx::stochastic {

/// Read-only view of one simulated path: positions B_{t_0..t_n} and the
/// increments between them.
struct PathView {
  const TimeGrid* grid;
  std::size_t path_id;
  std::span<const double> positions;
  std::span<const double> increments;

  double at(std::size_t step) const { return positions[step]; }
};

/// Brownian paths on a TimeGrid. Path p, step i uses the normal draw keyed by
/// (seed, p, i), so the ensemble does not depend on evaluation order.
class PathEnsemble {
 public:
  static PathEnsemble simulate(const TimeGrid& grid, std::size_t n_paths, std::uint64_t seed);

  /// Builds an ensemble from caller-supplied increments (row-major by path).
  PathEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed,
               std::vector<double> increments);

  const TimeGrid& grid() const noexcept { return grid_; }
  std::size_t n_paths() const noexcept { return n_paths_; }
  std::size_t n_steps() const noexcept { return grid_.n_steps(); }
  std::uint64_t seed() const noexcept { return seed_; }

  PathView path(std::size_t p) const;
  double position(std::size_t p, std::size_t step) const {
    return positions_[p * (n_steps() + 1) + step];
  }
  double increment(std::size_t p, std::size_t step) const {
    return increments_[p * n_steps() + step];
  }
  const std::vector<double>& increments() const noexcept { return increments_; }

  /// Columns: path_id, step, increment.
  void write_csv(std::ostream& os) const;

  bool operator==(const PathEnsemble& other) const noexcept;

 private:
  TimeGrid grid_;
  std::size_t n_paths_;
  std::uint64_t seed_;
  std::vector<double> increments_;
  std::vector<double> positions_;
};

/// Positions of one path after replacing every increment from `from_step` on.
/// Used by the adaptedness probes.
std::vector<double> perturbed_positions(const PathView& path, std::size_t from_step,
                                        std::uint64_t salt);

}  // namespace qgx::stochastic
