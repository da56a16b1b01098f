#pragma once

#include <cmath>
#include <cstdint>
#include <exception>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "linbf/coin.hpp"
#include "linbf/random.hpp"
#include "linbf/stats.hpp"

namespace linbf {

// Configuration of the linear factory for f(p) = Cp under the contract
// Cp <= 1 - eps. eps is stored post-clamp (<= 0.644) and k = m/(gamma*eps)
// always holds; with the defaults (gamma=1/2, m=2.3) that is k = 4.6/eps.
struct FactoryParams {
    double C = 2.0;
    double eps = 0.2;
    double gamma = 0.5;
    double m = 2.3;
    double k = 23.0;

    // r < 1 is required for the closed-form running-time bound to be finite.
    // The sampler itself is exact for any k > 0; an infeasible r only means
    // no finite bound certificate, so it is a flag here rather than an error.
    double r = 0.0;
    bool bound_feasible = true;
};

inline constexpr double kEpsClamp = 0.644;
inline constexpr double kDefaultGamma = 0.5;
inline constexpr double kDefaultM = 2.3;

inline double bound_rate(double eps, double gamma, double k) {
    return std::exp(-k * eps * gamma) / ((1.0 - gamma) * (1.0 - gamma));
}

inline FactoryParams make_params(double C, double eps,
                                 std::optional<double> gamma = std::nullopt,
                                 std::optional<double> m = std::nullopt) {
    if (!(C > 1.0))
        throw std::domain_error("make_params: C must be > 1");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::domain_error("make_params: eps must be in (0,1)");
    FactoryParams p;
    p.C = C;
    p.eps = std::min(eps, kEpsClamp);
    p.gamma = gamma.value_or(kDefaultGamma);
    p.m = m.value_or(kDefaultM);
    if (!(p.gamma > 0.0 && p.gamma < 1.0))
        throw std::domain_error("make_params: gamma must be in (0,1)");
    if (!(p.m > 0.0))
        throw std::domain_error("make_params: m must be > 0");
    p.k = p.m / (p.gamma * p.eps);
    p.r = bound_rate(p.eps, p.gamma, p.k);
    p.bound_feasible = p.r < 1.0;
    return p;
}

// Live state of one run: the target coin is (C_j p)^i at stage j. The stage
// recursion keeps k_j * eps_j = k * eps constant.
struct StageState {
    std::uint64_t i = 1;
    std::uint64_t j = 1;
    double C_j = 0.0;
    double eps_j = 0.0;
    double k_j = 0.0;
};

inline StageState initial_stage(const FactoryParams& p) {
    return {1, 1, p.C, p.eps, p.k};
}

inline void advance_stage(StageState& s, double gamma) {
    s.C_j *= 1.0 + gamma * s.eps_j;
    s.eps_j *= 1.0 - gamma;
    s.k_j /= 1.0 - gamma;
    ++s.j;
    // Reaching stage j has probability <= exp(-(j-1) m); eps_j underflow
    // would need ~1000 stages. Fail loudly rather than run with a biased gate.
    if (s.eps_j < 1e-300)
        throw InvariantError("advance_stage: eps_j underflow");
}

struct RunRecord {
    bool output = false;
    std::uint64_t flips = 0;           // coin flips consumed by this run
    std::uint64_t stages_entered = 1;
    std::uint64_t max_i = 1;
};

// One Bern(Cp) draw from a p-coin, assuming Cp <= 1 - eps (unverifiable
// here: the factory never sees p). Exact sampler:
//
//   i=1; repeat:
//     repeat: B <- coin, G <- Geo((C_j-1)/C_j), i <- i - 1 + (1-B) G
//     until i = 0 or i >= k_j
//     if i >= k_j: R <- Bern((1 + gamma eps_j)^-i); stage advance
//   until i = 0 or R = 0; return 1(i = 0)
//
// The coin is the only source of p-randomness; B and G are always drawn as a
// pair so aux-stream consumption does not depend on coin outcomes.
template <Coin CoinT>
RunRecord sample(const FactoryParams& params, CoinT& coin, UniformSource& aux) {
    StageState s = initial_stage(params);
    RunRecord rec;
    for (;;) {
        do {
            const bool heads = coin.flip();
            const std::uint64_t jump = geometric(aux, (s.C_j - 1.0) / s.C_j);
            ++rec.flips;
            s.i = s.i - 1 + (heads ? 0 : jump);
            rec.max_i = std::max(rec.max_i, s.i);
        } while (s.i != 0 && static_cast<double>(s.i) < s.k_j);
        if (s.i == 0) break;
        // Thinning gate: survive with probability (1 + gamma eps_j)^-i,
        // computed as exp(-i log1p(...)) since i can be large late on.
        const double survive =
            std::exp(-static_cast<double>(s.i) * std::log1p(params.gamma * s.eps_j));
        if (!bernoulli_known(aux, survive)) break;
        advance_stage(s, params.gamma);
    }
    rec.output = s.i == 0;
    rec.stages_entered = s.j;
    return rec;
}

// Aggregate over independent replicates.
struct SampleSummary {
    FlipStats flips;
    std::uint64_t ones = 0;
    std::uint64_t max_stages = 0;

    double output_mean() const {
        return flips.count() == 0
                   ? 0.0
                   : static_cast<double>(ones) / static_cast<double>(flips.count());
    }

    void merge(const SampleSummary& o) {
        flips.merge(o.flips);
        ones += o.ones;
        max_stages = std::max(max_stages, o.max_stages);
    }
};

// Stream allocation for replicate r under a base seed: even ids feed the
// auxiliary randomness, odd ids feed simulated coins. Every replicate is a
// fixed function of (seed, base stream, r), so results do not depend on how
// replicates are scheduled.
inline RandomSeed aux_seed_for(RandomSeed base, std::uint64_t replicate) {
    return {base.seed, base.stream_id + 2 * replicate};
}
inline RandomSeed coin_seed_for(RandomSeed base, std::uint64_t replicate) {
    return {base.seed, base.stream_id + 2 * replicate + 1};
}

namespace detail {

inline unsigned resolve_threads(unsigned threads, std::uint64_t n) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    if (threads > n) threads = static_cast<unsigned>(n == 0 ? 1 : n);
    return threads;
}

} // namespace detail

// n independent runs. make_coin(r) supplies the coin for replicate r (a
// value, or a reference for shared single-owner streams with threads=1);
// the aux stream for replicate r is derived from aux_seed as above.
// threads=0 means hardware concurrency. Partial summaries merge exactly,
// so the result is identical for any thread count.
template <typename MakeCoin>
SampleSummary sample_many(const FactoryParams& params, MakeCoin&& make_coin,
                          RandomSeed aux_seed, std::uint64_t n, unsigned threads = 0) {
    if (n == 0)
        throw std::domain_error("sample_many: n must be >= 1");
    const unsigned t = detail::resolve_threads(threads, n);

    auto run_range = [&](std::uint64_t lo, std::uint64_t hi, SampleSummary& out) {
        for (std::uint64_t r = lo; r < hi; ++r) {
            decltype(auto) coin = make_coin(r);
            UniformSource aux(aux_seed_for(aux_seed, r));
            const RunRecord rec = sample(params, coin, aux);
            out.flips.add(rec.flips);
            out.ones += rec.output ? 1 : 0;
            out.max_stages = std::max(out.max_stages, rec.stages_entered);
        }
    };

    if (t == 1) {
        SampleSummary total;
        run_range(0, n, total);
        return total;
    }

    std::vector<SampleSummary> partial(t);
    std::vector<std::exception_ptr> errors(t);
    std::vector<std::thread> workers;
    workers.reserve(t);
    const std::uint64_t chunk = n / t;
    const std::uint64_t rem = n % t;
    std::uint64_t lo = 0;
    for (unsigned w = 0; w < t; ++w) {
        const std::uint64_t hi = lo + chunk + (w < rem ? 1 : 0);
        workers.emplace_back([&, lo, hi, w] {
            try {
                run_range(lo, hi, partial[w]);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
        lo = hi;
    }
    for (auto& th : workers) th.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);

    SampleSummary total;
    for (const auto& part : partial) total.merge(part);
    return total;
}

} // namespace linbf
