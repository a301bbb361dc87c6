#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qgx::stochastic {

/// Uniform partition t0 < t1 < ... < tn = T.
///
/// Sub-grids created with sub() share the parent's step and node arithmetic,
/// so a solve restarted on a sub-grid sees bit-identical node times.
class TimeGrid {
 public:
  TimeGrid(double t0, double t_end, std::size_t n_steps);

  double t0() const noexcept { return t0_; }
  double t_end() const noexcept { return t_end_; }
  std::size_t n_steps() const noexcept { return n_; }
  double dt() const noexcept { return dt_; }
  double length() const noexcept { return t_end_ - t0_; }

  double node(std::size_t i) const;
  std::vector<double> nodes() const;

  /// Index of the node equal to t (within 1e-9 of a step); throws otherwise.
  std::size_t index_of(double t) const;
  bool contains_node(double t) const noexcept;

  /// The grid restricted to nodes first..last (inclusive).
  TimeGrid sub(std::size_t first, std::size_t last) const;

  /// True when every node of `coarse` is a node of this grid.
  bool refines(const TimeGrid& coarse) const noexcept;

  bool operator==(const TimeGrid& other) const noexcept;

 private:
  TimeGrid(double origin, double dt, std::size_t offset, std::size_t n, double t_end);

  double origin_;
  double dt_;
  std::size_t offset_;
  std::size_t n_;
  double t0_;
  double t_end_;
};

/// Uniform grid of an odd number of state points.
class SpaceGrid {
 public:
  SpaceGrid(double x_min, double x_max, std::size_t n_points);
  static SpaceGrid symmetric(double half_width, std::size_t n_points);

  double x_min() const noexcept { return x_min_; }
  double x_max() const noexcept { return x_max_; }
  double dx() const noexcept { return dx_; }
  std::size_t size() const noexcept { return n_; }
  double node(std::size_t j) const noexcept;
  std::vector<double> nodes() const;

  /// Nearest node index (clamped).
  std::size_t nearest(double x) const noexcept;

  /// Local cubic (4-point Lagrange) interpolation of nodal values; x outside
  /// the grid is clamped to the end values.
  double interpolate(std::span<const double> values, double x) const;

  bool operator==(const SpaceGrid& other) const noexcept;

 private:
  double x_min_;
  double x_max_;
  std::size_t n_;
  double dx_;
};

/// A real field sampled on TimeGrid x SpaceGrid, stored row-major by time.
class GridField {
 public:
  GridField(TimeGrid tgrid, SpaceGrid xgrid);
  GridField(TimeGrid tgrid, SpaceGrid xgrid, std::vector<double> data);

  const TimeGrid& tgrid() const noexcept { return tgrid_; }
  const SpaceGrid& xgrid() const noexcept { return xgrid_; }

  double& at(std::size_t i, std::size_t j) { return data_[i * xgrid_.size() + j]; }
  double at(std::size_t i, std::size_t j) const { return data_[i * xgrid_.size() + j]; }
  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;
  const std::vector<double>& data() const noexcept { return data_; }

  /// Cubic in x on time row i.
  double at_state(std::size_t i, double x) const { return xgrid_.interpolate(row(i), x); }
  /// Cubic in x, linear in t.
  double interpolate(double t, double x) const;

  double sup_norm() const noexcept;

 private:
  TimeGrid tgrid_;
  SpaceGrid xgrid_;
  std::vector<double> data_;
};

}  // namespace qgx::stochastic
