#include "qgx/paths.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "qgx/errors.hpp"
#include "qgx/random.hpp"

namespace qgx::stochastic {

PathEnsemble PathEnsemble::simulate(const TimeGrid& grid, std::size_t n_paths,
                                    std::uint64_t seed) {
  if (n_paths == 0) {
    throw InvalidArgument("simulate_paths: n_paths must be positive");
  }
  const std::size_t n = grid.n_steps();
  const double sd = std::sqrt(grid.dt());
  std::vector<double> inc(n_paths * n);
  for (std::size_t p = 0; p < n_paths; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      inc[p * n + i] = sd * standard_normal(seed, p, i);
    }
  }
  return PathEnsemble(grid, n_paths, seed, std::move(inc));
}

PathEnsemble::PathEnsemble(TimeGrid grid, std::size_t n_paths, std::uint64_t seed,
                           std::vector<double> increments)
    : grid_(grid), n_paths_(n_paths), seed_(seed), increments_(std::move(increments)) {
  if (n_paths_ == 0 || grid_.n_steps() == 0) {
    throw InvalidArgument("PathEnsemble: zero paths or zero steps");
  }
  const std::size_t n = grid_.n_steps();
  if (increments_.size() != n_paths_ * n) {
    throw InvalidArgument("PathEnsemble: increment count does not match grid");
  }
  positions_.assign(n_paths_ * (n + 1), 0.0);
  for (std::size_t p = 0; p < n_paths_; ++p) {
    double b = 0.0;
    double* row = &positions_[p * (n + 1)];
    row[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      b += increments_[p * n + i];
      row[i + 1] = b;
    }
  }
}

PathView PathEnsemble::path(std::size_t p) const {
  if (p >= n_paths_) {
    throw InvalidArgument("PathEnsemble: path index out of range");
  }
  const std::size_t n = n_steps();
  return PathView{&grid_, p, std::span<const double>(positions_).subspan(p * (n + 1), n + 1),
                  std::span<const double>(increments_).subspan(p * n, n)};
}

void PathEnsemble::write_csv(std::ostream& os) const {
  os << "path_id,step,increment\n";
  char buf[64];
  const std::size_t n = n_steps();
  for (std::size_t p = 0; p < n_paths_; ++p) {
    for (std::size_t i = 0; i < n; ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", increments_[p * n + i]);
      os << p << ',' << i << ',' << buf << '\n';
    }
  }
}

bool PathEnsemble::operator==(const PathEnsemble& other) const noexcept {
  return grid_ == other.grid_ && n_paths_ == other.n_paths_ && seed_ == other.seed_ &&
         increments_ == other.increments_;
}

std::vector<double> perturbed_positions(const PathView& path, std::size_t from_step,
                                        std::uint64_t salt) {
  const std::size_t n = path.increments.size();
  std::vector<double> pos(path.positions.begin(), path.positions.end());
  const double sd = std::sqrt(path.grid->dt());
  for (std::size_t i = from_step; i < n; ++i) {
    const double inc = 3.0 * sd * standard_normal(derive_seed(salt, path.path_id), 0, i);
    pos[i + 1] = pos[i] + inc;
  }
  return pos;
}

}  // namespace qgx::stochastic
