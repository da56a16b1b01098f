#pragma once

#include <cctype>
#include <concepts>
#include <cstdint>
#include <istream>

#include "linbf/errors.hpp"
#include "linbf/random.hpp"

namespace linbf {

// Anything a factory may do with a p-coin: flip it. Algorithms are templated
// on this concept, so they cannot observe p or anything else about the coin.
template <typename T>
concept Coin = requires(T c) {
    { c.flip() } -> std::convertible_to<bool>;
};

// Runtime-polymorphic coin with a tamper-proof flip counter: the counter
// lives here and derived classes only implement next(), so flips_used()
// is exact by construction. The counter advances only on successful flips.
class CoinSource {
public:
    virtual ~CoinSource() = default;

    bool flip() {
        const bool b = next();
        ++flips_;
        return b;
    }

    std::uint64_t flips_used() const noexcept { return flips_; }

private:
    virtual bool next() = 0;

    std::uint64_t flips_ = 0;
};

// iid Bern(p) coin driven by its own uniform stream.
class SimulatedCoin final : public CoinSource {
public:
    SimulatedCoin(double p, RandomSeed seed) : p_(p), src_(seed) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::domain_error("SimulatedCoin: p must be in [0,1]");
    }

    // For harness reporting only; not reachable through the Coin concept.
    double p() const noexcept { return p_; }

private:
    bool next() override { return src_.next_uniform() < p_; }

    double p_;
    UniformSource src_;
};

// Coin backed by an external stream of ASCII '0'/'1' bytes. Whitespace is
// skipped; any other byte is a format error; end of stream raises
// StreamExhaustedError carrying the flips consumed so far.
class StreamCoin final : public CoinSource {
public:
    explicit StreamCoin(std::istream& in) : in_(&in) {}

private:
    bool next() override {
        for (int ch; (ch = in_->get()) != std::char_traits<char>::eof();) {
            if (ch == '0') return false;
            if (ch == '1') return true;
            if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') continue;
            throw StreamFormatError(static_cast<char>(ch));
        }
        throw StreamExhaustedError(flips_used());
    }

    std::istream* in_;
};

} // namespace linbf
