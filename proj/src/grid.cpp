#include "qgx/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qgx/errors.hpp"

namespace qgx::stochastic {

TimeGrid::TimeGrid(double t0, double t_end, std::size_t n_steps)
    : origin_(t0), dt_(0.0), offset_(0), n_(n_steps), t0_(t0), t_end_(t_end) {
  if (!std::isfinite(t0) || !std::isfinite(t_end) || t0 < 0.0) {
    throw InvalidArgument("TimeGrid: t0 must be finite and non-negative");
  }
  if (!(t_end > t0)) {
    throw InvalidArgument("TimeGrid: T must exceed t0");
  }
  if (n_steps == 0) {
    throw InvalidArgument("TimeGrid: n_steps must be positive");
  }
  dt_ = (t_end - t0) / static_cast<double>(n_steps);
}

TimeGrid::TimeGrid(double origin, double dt, std::size_t offset, std::size_t n, double t_end)
    : origin_(origin), dt_(dt), offset_(offset), n_(n), t0_(0.0), t_end_(t_end) {
  t0_ = origin_ + static_cast<double>(offset_) * dt_;
}

double TimeGrid::node(std::size_t i) const {
  if (i > n_) {
    throw InvalidArgument("TimeGrid: node index out of range");
  }
  if (i == n_) {
    return t_end_;
  }
  return origin_ + static_cast<double>(offset_ + i) * dt_;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(n_ + 1);
  for (std::size_t i = 0; i <= n_; ++i) {
    out[i] = node(i);
  }
  return out;
}

bool TimeGrid::contains_node(double t) const noexcept {
  const double k = (t - t0_) / dt_;
  const double r = std::round(k);
  return r >= 0.0 && r <= static_cast<double>(n_) && std::abs(k - r) < 1e-9;
}

std::size_t TimeGrid::index_of(double t) const {
  if (!contains_node(t)) {
    throw InvalidArgument("TimeGrid: time " + std::to_string(t) + " is not a grid node");
  }
  return static_cast<std::size_t>(std::round((t - t0_) / dt_));
}

TimeGrid TimeGrid::sub(std::size_t first, std::size_t last) const {
  if (first >= last || last > n_) {
    throw InvalidArgument("TimeGrid::sub: need first < last <= n_steps");
  }
  return TimeGrid(origin_, dt_, offset_ + first, last - first, node(last));
}

bool TimeGrid::refines(const TimeGrid& coarse) const noexcept {
  for (std::size_t i = 0; i <= coarse.n_steps(); ++i) {
    if (!contains_node(coarse.node(i))) {
      return false;
    }
  }
  return true;
}

bool TimeGrid::operator==(const TimeGrid& other) const noexcept {
  return t0_ == other.t0_ && t_end_ == other.t_end_ && n_ == other.n_;
}

SpaceGrid::SpaceGrid(double x_min, double x_max, std::size_t n_points)
    : x_min_(x_min), x_max_(x_max), n_(n_points), dx_(0.0) {
  if (!std::isfinite(x_min) || !std::isfinite(x_max) || !(x_min < x_max)) {
    throw InvalidArgument("SpaceGrid: need finite x_min < x_max");
  }
  if (n_points < 3 || n_points % 2 == 0) {
    throw InvalidArgument("SpaceGrid: n_points must be odd and >= 3");
  }
  dx_ = (x_max - x_min) / static_cast<double>(n_points - 1);
  if (x_min < 0.0 && 0.0 < x_max) {
    const double k = -x_min / dx_;
    if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
      throw InvalidArgument("SpaceGrid: 0 must be a grid node when it is interior");
    }
  }
}

SpaceGrid SpaceGrid::symmetric(double half_width, std::size_t n_points) {
  if (!(half_width > 0.0)) {
    throw InvalidArgument("SpaceGrid::symmetric: half width must be positive");
  }
  return SpaceGrid(-half_width, half_width, n_points);
}

double SpaceGrid::node(std::size_t j) const noexcept {
  if (j + 1 == n_) {
    return x_max_;
  }
  return x_min_ + static_cast<double>(j) * dx_;
}

std::vector<double> SpaceGrid::nodes() const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) {
    out[j] = node(j);
  }
  return out;
}

std::size_t SpaceGrid::nearest(double x) const noexcept {
  const double k = std::round((x - x_min_) / dx_);
  if (!(k > 0.0)) {
    return 0;
  }
  return std::min(static_cast<std::size_t>(k), n_ - 1);
}

double SpaceGrid::interpolate(std::span<const double> values, double x) const {
  if (values.size() != n_) {
    throw InvalidArgument("SpaceGrid::interpolate: value count does not match grid");
  }
  if (!(x > x_min_)) {
    return values.front();
  }
  if (!(x < x_max_)) {
    return values.back();
  }
  const double s = (x - x_min_) / dx_;
  auto j = static_cast<std::size_t>(std::floor(s));
  if (j >= n_ - 1) {
    j = n_ - 2;
  }
  // stencil j0..j0+3 containing [j, j+1], shifted inward at the edges
  std::size_t j0 = j == 0 ? 0 : j - 1;
  if (j0 + 3 >= n_) {
    j0 = n_ - 4;
  }
  const double u = s - static_cast<double>(j0);
  const double f0 = values[j0], f1 = values[j0 + 1], f2 = values[j0 + 2], f3 = values[j0 + 3];
  const double l0 = -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0;
  const double l1 = u * (u - 2.0) * (u - 3.0) / 2.0;
  const double l2 = -u * (u - 1.0) * (u - 3.0) / 2.0;
  const double l3 = u * (u - 1.0) * (u - 2.0) / 6.0;
  return l0 * f0 + l1 * f1 + l2 * f2 + l3 * f3;
}

bool SpaceGrid::operator==(const SpaceGrid& other) const noexcept {
  return x_min_ == other.x_min_ && x_max_ == other.x_max_ && n_ == other.n_;
}

GridField::GridField(TimeGrid tgrid, SpaceGrid xgrid)
    : tgrid_(tgrid), xgrid_(xgrid), data_((tgrid.n_steps() + 1) * xgrid.size(), 0.0) {}

GridField::GridField(TimeGrid tgrid, SpaceGrid xgrid, std::vector<double> data)
    : tgrid_(tgrid), xgrid_(xgrid), data_(std::move(data)) {
  if (data_.size() != (tgrid_.n_steps() + 1) * xgrid_.size()) {
    throw InvalidArgument("GridField: data size does not match grids");
  }
}

std::span<double> GridField::row(std::size_t i) {
  return std::span<double>(data_).subspan(i * xgrid_.size(), xgrid_.size());
}

std::span<const double> GridField::row(std::size_t i) const {
  return std::span<const double>(data_).subspan(i * xgrid_.size(), xgrid_.size());
}

double GridField::interpolate(double t, double x) const {
  const double s = (t - tgrid_.t0()) / tgrid_.dt();
  if (!(s > 0.0)) {
    return at_state(0, x);
  }
  const auto n = tgrid_.n_steps();
  if (!(s < static_cast<double>(n))) {
    return at_state(n, x);
  }
  auto i = static_cast<std::size_t>(std::floor(s));
  const double w = s - static_cast<double>(i);
  if (w < 1e-12) {
    return at_state(i, x);
  }
  return (1.0 - w) * at_state(i, x) + w * at_state(i + 1, x);
}

double GridField::sup_norm() const noexcept {
  double m = 0.0;
  for (double v : data_) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

}  // namespace qgx::stochastic
