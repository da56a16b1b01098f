#pragma once

#include <cstdint>

#include "linbf/coin.hpp"
#include "linbf/random.hpp"

namespace linbf {

struct VonNeumannResult {
    bool bit;             // determined solely by the final flip pair
    std::uint64_t flips;  // always even, >= 2
};

// Von Neumann's fair-bit factory: flip pairs until they disagree, output 1
// iff the pair was (0,1). Bern(1/2) for any p in (0,1).
//
// max_flips is a safety net against p in {0,1} inputs (which never disagree);
// the default trips with probability (p^2+(1-p)^2)^(2^19), i.e. never for any
// p meaningfully inside (0,1). Pass 0 to disable the guard.
template <Coin C>
VonNeumannResult von_neumann(C& coin, std::uint64_t max_flips = 1ull << 20) {
    std::uint64_t flips = 0;
    for (;;) {
        const bool a = coin.flip();
        const bool b = coin.flip();
        flips += 2;
        if (a != b) return {!a && b, flips};
        if (max_flips != 0 && flips >= max_flips)
            throw GuardExceededError("von_neumann: non-termination suspected", flips);
    }
}

// Bern(q) for known q as a zero-flip factory, usable anywhere a factory
// output is expected in composition tests.
inline bool known_q_factory(UniformSource& src, double q) {
    return bernoulli_known(src, q);
}

} // namespace linbf
