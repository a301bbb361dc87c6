#pragma once

#include <cstdint>
#include <vector>

#include "qgx/bsde_solver.hpp"

namespace qgx::lab {

/// The 12 fixed bounded terminals used for "for all xi" hypotheses.
std::vector<bsde::TerminalCondition> fixed_terminals();

/// a tanh(b (x - c)) + d exp(-(x - e)^2) with parameters drawn from the seed.
std::vector<bsde::TerminalCondition> random_terminals(std::uint64_t seed, int count = 20);

/// Fixed family followed by the seeded random family.
std::vector<bsde::TerminalCondition> terminal_family(std::uint64_t seed, int n_random = 20);

/// Largest far-field settling width over a family (see default_space_grid).
double settling_width(const std::vector<bsde::TerminalCondition>& family);

}  // namespace qgx::lab
