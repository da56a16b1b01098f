#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "linbf/errors.hpp"

namespace linbf {

// Identifies one reproducible random stream. Same (seed, stream_id) -> same
// sequence; distinct stream_id -> statistically independent streams, which is
// what lets replicates run in parallel without sharing generator state.
struct RandomSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

// PCG64 (XSL-RR 128/64, setseq variant). 128-bit LCG state advanced with a
// per-stream odd increment derived from stream_id, output mixed by
// xorshift-high + random rotate. Small, fast, and passes the usual batteries;
// the setseq increment is what gives the independent-streams guarantee.
class UniformSource {
public:
    explicit UniformSource(RandomSeed s = {}) noexcept {
        inc_ = (static_cast<u128>(s.stream_id) << 1u) | 1u;
        state_ = 0;
        bump();
        state_ += s.seed;
        bump();
    }

    // Uniform on [0,1) with 53 random bits. Never returns 1.0, and 1-u never
    // rounds to 0, which keeps log1p(-u) finite downstream.
    double next_uniform() {
        ++draws_;
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    std::uint64_t draws_made() const noexcept { return draws_; }

private:
    using u128 = unsigned __int128;

    static constexpr u128 kMultiplier =
        (static_cast<u128>(0x2360ed051fc65da4ull) << 64) | 0x4385df649fccf645ull;

    void bump() { state_ = state_ * kMultiplier + inc_; }

    std::uint64_t next_u64() {
        bump();
        const std::uint64_t xored =
            static_cast<std::uint64_t>(state_ >> 64) ^ static_cast<std::uint64_t>(state_);
        const unsigned rot = static_cast<unsigned>(state_ >> 122);
        return (xored >> rot) | (xored << ((64u - rot) & 63u));
    }

    u128 state_ = 0;
    u128 inc_ = 1;
    std::uint64_t draws_ = 0;
};

// Bernoulli(q) for known q. Consumes exactly one uniform.
inline bool bernoulli_known(UniformSource& src, double q) {
    if (!(q >= 0.0 && q <= 1.0))
        throw std::domain_error("bernoulli_known: q must be in [0,1]");
    return src.next_uniform() < q;
}

// Geometric on {1,2,...} with P(G=g) = (1-a)^(g-1) a, mean 1/a, sampled by
// inversion: G = 1 + floor(log(1-U)/log(1-a)). One uniform per draw.
inline std::uint64_t geometric(UniformSource& src, double a) {
    if (!(a > 0.0 && a <= 1.0))
        throw std::domain_error("geometric: a must be in (0,1]");
    double u = src.next_uniform();
    while (1.0 - u == 0.0) // unreachable with 53-bit uniforms; kept as a guard
        u = src.next_uniform();
    if (a == 1.0) return 1; // deterministic; also log1p(-1) is -inf
    const double g = std::floor(std::log1p(-u) / std::log1p(-a));
    return 1 + static_cast<std::uint64_t>(g);
}

} // namespace linbf
