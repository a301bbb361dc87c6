#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>

#include "qgx/bsde_solver.hpp"

namespace qgx::bsde {

/// Columns t, x, u, v; one row per grid node, time-major. Only every
/// time_stride-th time row is written (the terminal row always is).
void write_surface_csv(const ValueSurface& s, std::ostream& os, const std::string& comment = "",
                       std::size_t time_stride = 1);

/// Binary layout (little endian):
///   char[4] "QGXS", uint32 version (1),
///   f64 t0, f64 T, u64 n_steps, f64 x_min, f64 x_max, u64 n_points,
///   f64 u[(n_steps+1) * n_points], f64 v[...]   (row-major by time)
void write_surface_binary(const ValueSurface& s, std::ostream& os);
ValueSurface read_surface_binary(std::istream& is);

}  // namespace qgx::bsde
