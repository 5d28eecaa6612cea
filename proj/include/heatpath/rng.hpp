#pragma once
/**
 * @file rng.hpp
 * @brief Philox4x32-10 counter-based generator with per-sample streams.
 *
 * Stream derivation: the 64-bit master seed is the Philox key; a stream is
 * identified by a 64-bit index (the Monte Carlo sample number) stored in the
 * upper half of the 128-bit counter, and the lower half counts blocks drawn
 * from that stream. Sample i therefore sees the same numbers no matter which
 * worker evaluates it.
 */

#include <array>
#include <cstdint>

namespace heatpath {

class PhiloxStream {
public:
    PhiloxStream(std::uint64_t seed, std::uint64_t stream);

    std::uint32_t next_u32();
    /// Uniform in (0,1), 53-bit resolution; never returns 0.
    double uniform();
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> counter,
                                              std::array<std::uint32_t, 2> key);

private:
    void refill();

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 4> counter_;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace heatpath
