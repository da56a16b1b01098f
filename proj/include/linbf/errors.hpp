#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace linbf {

// A bit stream ran dry mid-run. Carries the flips consumed before the fault
// so a harness can report how far the run got.
class StreamExhaustedError : public std::runtime_error {
public:
    explicit StreamExhaustedError(std::uint64_t flips_used)
        : std::runtime_error("coin stream exhausted after " +
                             std::to_string(flips_used) + " flips"),
          flips_used_(flips_used) {}

    std::uint64_t flips_used() const noexcept { return flips_used_; }

private:
    std::uint64_t flips_used_;
};

// A byte in a coin stream was neither '0'/'1' nor whitespace.
class StreamFormatError : public std::runtime_error {
public:
    explicit StreamFormatError(char byte)
        : std::runtime_error(std::string("invalid byte in coin stream: '") +
                             byte + "'") {}
};

// A loop guard tripped: the run consumed more draws than the configured
// ceiling, which for the guarded algorithms means the input is almost
// certainly outside its termination domain (e.g. a p=0 coin).
class GuardExceededError : public std::runtime_error {
public:
    GuardExceededError(const std::string& what, std::uint64_t draws)
        : std::runtime_error(what + " (guard tripped after " +
                             std::to_string(draws) + " draws)"),
          draws_(draws) {}

    std::uint64_t draws() const noexcept { return draws_; }

private:
    std::uint64_t draws_;
};

// An internal invariant that should be unreachable was violated.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Requested bound does not exist (r >= 1 makes the series diverge).
class InfeasibleBoundError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

} // namespace linbf
