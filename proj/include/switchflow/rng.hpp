#pragma once

#include <array>
#include <cstdint>

namespace switchflow {

/**
 * Philox4x32-10 counter-based generator (Salmon et al., Random123).
 *
 * Output contract: block(counter, key) is bit-exact across platforms and
 * matches the Random123 known-answer vectors. Normals are derived with the
 * Box-Muller transform from two 53-bit uniforms; those go through libm and
 * are reproducible on any IEEE-754 platform with the same libm.
 */
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key) noexcept;
};

/// Two independent standard normals for draw pair `pair_index` of stream `stream`.
/// Streams are independent for distinct (seed, stream) pairs.
std::array<double, 2> normal_pair(std::uint64_t seed, std::uint64_t stream,
                                  std::uint64_t pair_index) noexcept;

/// Maps 64 random bits to a uniform in the open interval (0, 1).
double to_open_unit(std::uint64_t bits) noexcept;

} // namespace switchflow
