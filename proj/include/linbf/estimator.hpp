#pragma once

#include <cstdint>
#include <stdexcept>

#include "linbf/bounds.hpp"
#include "linbf/linear_factory.hpp"

namespace linbf {

// Result of one sequential estimate of p from Bern(Cp) factory draws:
// draw until the 4th success, estimate p_hat = 4/(C A). A is then
// negative-binomial(4, Cp), which is what gives the estimator its
// (sqrt(eps), 1/4)-approximation guarantee for p in [0, 1/2].
struct EstimateRecord {
    double p_hat = 0.0;
    std::uint64_t draws = 0;       // A: factory calls until the 4th success
    std::uint64_t total_flips = 0; // underlying coin flips across all calls
};

inline constexpr std::uint64_t kEstimateSuccesses = 4;
inline constexpr std::uint64_t kDefaultMaxDraws = 10'000'000;

// Runs the sequential estimator. max_draws guards against p ~ 0 coins
// (the stopping rule would never fire); tripping it is a loud failure
// signalling p below ~4/(C max_draws), not a statistical result.
template <Coin CoinT>
EstimateRecord estimate_p(const FactoryParams& params, CoinT& coin, UniformSource& aux,
                          std::uint64_t max_draws = kDefaultMaxDraws) {
    EstimateRecord rec;
    std::uint64_t successes = 0;
    while (successes < kEstimateSuccesses) {
        if (rec.draws >= max_draws)
            throw GuardExceededError("estimate_p: non-termination suspected (p ~ 0?)",
                                     rec.draws);
        const RunRecord run = sample(params, coin, aux);
        ++rec.draws;
        rec.total_flips += run.flips;
        successes += run.output ? 1 : 0;
    }
    rec.p_hat = static_cast<double>(kEstimateSuccesses) / (params.C * static_cast<double>(rec.draws));
    return rec;
}

// Expected coin-flip cost of one estimate: 4/(Cp) factory calls times the
// per-call flip cost, here taken from the closed-form bound at that p.
inline double expected_flip_cost(const FactoryParams& params, double p) {
    if (!(p > 0.0)) throw std::domain_error("expected_flip_cost: p must be > 0");
    const double per_call = precise_bound({params.C, params.eps, params.gamma, params.k, p});
    return 4.0 / (params.C * p) * per_call;
}

// Same composition with a measured per-call mean instead of the bound.
inline double expected_flip_cost(const FactoryParams& params, double p,
                                 double per_call_mean_flips) {
    if (!(p > 0.0)) throw std::domain_error("expected_flip_cost: p must be > 0");
    return 4.0 / (params.C * p) * per_call_mean_flips;
}

} // namespace linbf
