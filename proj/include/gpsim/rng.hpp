#pragma once

#include <array>
#include <cstdint>

#include <boost/math/special_functions/erf.hpp>

namespace gpsim {

// Counter-based random streams (Philox4x32-10). Every draw is a pure
// function of (seed, stream, index triple), so any evaluation order --
// including parallel ones -- produces the same numbers. Simulation code
// derives one stream per purpose (initial draws, Brownian increments,
// graph sampling, ...) from the fixed ids below.

enum class Stream : std::uint32_t {
    init = 1,        // initial-condition draws, indexed by particle
    brownian = 2,    // Brownian increments, indexed by (particle, step)
    graph = 3,       // adjacency sampling, indexed by (i, j), i < j
    label = 4,       // uniform-random labels, indexed by particle
    pair_init = 5,   // coupled-pair initial draws, indexed by replica
    pair_brownian = 6,  // coupled-pair shared noise, (replica, step)
    cutnorm = 7,     // heuristic restarts
    permutation = 8, // sampled block permutations
    bootstrap = 9,   // resampling for standard errors
    test = 1000,     // scratch streams for tests
};

namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::uint64_t key,
                                          std::array<std::uint32_t, 4> ctr) {
    std::uint32_t k0 = static_cast<std::uint32_t>(key);
    std::uint32_t k1 = static_cast<std::uint32_t>(key >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ k0, lo1, hi0 ^ ctr[3] ^ k1, lo0};
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return ctr;
}

}  // namespace philox

class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Indices must stay below 2^32 (particles, steps, replicas all do);
    // distinct indices then map to distinct counters with no collisions.
    std::uint64_t bits64(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                         std::uint64_t c = 0) const {
        const auto out = philox::block(
            seed_, {static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(a),
                    static_cast<std::uint32_t>(b),
                    static_cast<std::uint32_t>(c)});
        return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    }

    // Uniform on the open interval (0,1); never returns an exact 0 or 1 so
    // the inverse normal CDF stays finite.
    double uniform(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                   std::uint64_t c = 0) const {
        const std::uint64_t u = bits64(stream, a, b, c);
        return static_cast<double>(u >> 11) * 0x1.0p-53 + 0x1.0p-54;
    }

    // Standard normal via the inverse CDF of the counter stream.
    double normal(Stream stream, std::uint64_t a, std::uint64_t b = 0,
                  std::uint64_t c = 0) const {
        return inverse_normal_cdf(uniform(stream, a, b, c));
    }

    static double inverse_normal_cdf(double u) {
        // Phi^{-1}(u) = -sqrt(2) erfc^{-1}(2u)
        return -1.4142135623730951 * boost::math::erfc_inv(2.0 * u);
    }

private:
    std::uint64_t seed_;
};

}  // namespace gpsim
