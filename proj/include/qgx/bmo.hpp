#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qgx/grid.hpp"
#include "qgx/paths.hpp"
#include "qgx/stopping_time.hpp"

namespace qgx::stochastic {

struct BmoOptions {
  std::size_t n_subpaths = 10000;
  std::uint64_t seed = 7;
};

struct BmoEstimate {
  double value = 0.0;              // max over the family
  std::vector<double> per_member;  // empirical max over paths, per stopping time
  std::size_t argmax = 0;
};

/// Lower estimate of ||Z||^2_BMO: for each stopping time tau in the family and
/// each path, E[int_tau^T z(s,B_s)^2 ds | B_tau] by re-simulation from the
/// stopped state on the ensemble grid; max over paths, then over the family.
BmoEstimate bmo_estimate(const GridField& z, const PathEnsemble& ensemble,
                         const std::vector<FiniteStoppingTime>& family,
                         const BmoOptions& options = {});

/// Deterministic grid times plus first hitting times of |B| at three levels.
std::vector<FiniteStoppingTime> default_bmo_family(const TimeGrid& grid);

}  // namespace qgx::stochastic
