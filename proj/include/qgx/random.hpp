#pragma once

#include <array>
#include <cstdint>

namespace qgx::stochastic {

/// Philox4x32-10 counter-based generator. Every draw is a pure function of
/// (key, counter), so paths can be generated in any order or in parallel.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// Mixes a base seed with a stream label (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Two uniforms in (0,1) for (seed, stream, index).
std::array<double, 2> uniform_pair(std::uint64_t seed, std::uint64_t stream,
                                   std::uint64_t index) noexcept;

/// One N(0,1) draw keyed by (seed, stream, index), via Box-Muller.
double standard_normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) noexcept;

}  // namespace qgx::stochastic
