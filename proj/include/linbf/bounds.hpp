#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <thread>
#include <vector>

#include "linbf/errors.hpp"
#include "linbf/linear_factory.hpp"

namespace linbf {

// Inputs for the closed-form expected-flips bound at a fixed p.
struct BoundInputs {
    double C;
    double eps;
    double gamma;
    double k;
    double p;
};

namespace detail {

inline void check_bound_domain(double C, double eps) {
    if (!(C > 1.0)) throw std::domain_error("bounds: C must be > 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::domain_error("bounds: eps must be in (0,1)");
}

} // namespace detail

// Expected coin flips of the sampler at a fixed p, from the stage-sum
// closed form:
//
//   E[T] <= (k(C-1)+C)/(1-(Cp)^k) - (C-1)/(1-Cp)
//           + r [gamma k (C/(1-eps) - 1) + (1-gamma)^2 C/(1-eps)]
//             / ((1-r) (1-(Cp)^k)),      r = exp(-k eps gamma)(1-gamma)^-2.
//
// At p = 0 the natural evaluation gives the limits 1/(1-(Cp)^k) -> 1 and
// (C-1)/(1-Cp) -> C-1. Requires r < 1; otherwise the stage series diverges.
inline double precise_bound(const BoundInputs& in) {
    detail::check_bound_domain(in.C, in.eps);
    if (!(in.gamma > 0.0 && in.gamma < 1.0))
        throw std::domain_error("bounds: gamma must be in (0,1)");
    if (!(in.k > 0.0)) throw std::domain_error("bounds: k must be > 0");
    if (!(in.p >= 0.0 && in.C * in.p < 1.0))
        throw std::domain_error("bounds: need 0 <= p and Cp < 1");
    const double r = bound_rate(in.eps, in.gamma, in.k);
    if (!(r < 1.0))
        throw InfeasibleBoundError("precise_bound: r >= 1, bound diverges");
    const double cp = in.C * in.p;
    const double denom = 1.0 - std::pow(cp, in.k);
    const double c_eps = in.C / (1.0 - in.eps);
    const double correction =
        r * (in.gamma * in.k * (c_eps - 1.0) + (1.0 - in.gamma) * (1.0 - in.gamma) * c_eps) /
        (1.0 - r);
    return (in.k * (in.C - 1.0) + in.C) / denom - (in.C - 1.0) / (1.0 - cp) +
           correction / denom;
}

namespace detail {

// Scans sup_p precise_bound for fixed (C, eps) and varying (gamma, k).
// Per-point work is one exp once the p-grid logs are cached, which is what
// makes the (m, gamma) optimizer affordable.
class SupScanner {
public:
    SupScanner(double C, double eps, std::size_t points = 10001)
        : C_(C), eps_(eps), log_cp_(points), ruin_term_(points) {
        check_bound_domain(C, eps);
        const double pmax = (1.0 - eps) / C;
        for (std::size_t idx = 0; idx < points; ++idx) {
            const double p = pmax * static_cast<double>(idx) / static_cast<double>(points - 1);
            const double cp = C * p;
            log_cp_[idx] = cp > 0.0 ? std::log(cp) : 0.0; // idx 0 handled specially
            ruin_term_[idx] = (C - 1.0) / (1.0 - cp);
        }
    }

    double pmax() const { return (1.0 - eps_) / C_; }
    std::size_t points() const { return log_cp_.size(); }

    double at(std::size_t idx, double gamma, double k, double r) const {
        const double denom =
            idx == 0 ? 1.0 : 1.0 - std::exp(k * log_cp_[idx]);
        const double c_eps = C_ / (1.0 - eps_);
        const double head = k * (C_ - 1.0) + C_;
        const double corr =
            r * (gamma * k * (c_eps - 1.0) + (1.0 - gamma) * (1.0 - gamma) * c_eps) / (1.0 - r);
        return (head + corr) / denom - ruin_term_[idx];
    }

    // Max over the cached grid, then golden-section refinement around the
    // best point down to 1e-6 relative width in p.
    double sup(double gamma, double k) const {
        const double r = bound_rate(eps_, gamma, k);
        if (!(r < 1.0))
            throw InfeasibleBoundError("sup_bound: r >= 1, bound diverges");
        std::size_t best = 0;
        double best_val = at(0, gamma, k, r);
        for (std::size_t idx = 1; idx < log_cp_.size(); ++idx) {
            const double v = at(idx, gamma, k, r);
            if (v > best_val) {
                best_val = v;
                best = idx;
            }
        }
        const double step = pmax() / static_cast<double>(log_cp_.size() - 1);
        const double lo = best == 0 ? 0.0 : (static_cast<double>(best) - 1.0) * step;
        const double hi = std::min(pmax(), (static_cast<double>(best) + 1.0) * step);
        const double refined = golden_max(gamma, k, r, lo, hi);
        return std::max(best_val, refined);
    }

private:
    double value_at_p(double p, double gamma, double k, double r) const {
        const double cp = C_ * p;
        const double denom = cp > 0.0 ? 1.0 - std::exp(k * std::log(cp)) : 1.0;
        const double c_eps = C_ / (1.0 - eps_);
        const double head = k * (C_ - 1.0) + C_;
        const double corr =
            r * (gamma * k * (c_eps - 1.0) + (1.0 - gamma) * (1.0 - gamma) * c_eps) / (1.0 - r);
        return (head + corr) / denom - (C_ - 1.0) / (1.0 - cp);
    }

    double golden_max(double gamma, double k, double r, double lo, double hi) const {
        constexpr double kInvPhi = 0.6180339887498949;
        double a = lo, b = hi;
        double c = b - kInvPhi * (b - a);
        double d = a + kInvPhi * (b - a);
        double fc = value_at_p(c, gamma, k, r);
        double fd = value_at_p(d, gamma, k, r);
        while (b - a > 1e-6 * std::max(1e-12, hi)) {
            if (fc > fd) {
                b = d;
                d = c;
                fd = fc;
                c = b - kInvPhi * (b - a);
                fc = value_at_p(c, gamma, k, r);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + kInvPhi * (b - a);
                fd = value_at_p(d, gamma, k, r);
            }
        }
        return std::max(fc, fd);
    }

    double C_;
    double eps_;
    std::vector<double> log_cp_;
    std::vector<double> ruin_term_;
};

} // namespace detail

// sup over p in [0, (1-eps)/C] of precise_bound, by dense grid scan
// (10^4+1 points) plus local refinement.
inline double sup_bound(double C, double eps, double gamma, double m) {
    if (!(m > 0.0)) throw std::domain_error("sup_bound: m must be > 0");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::domain_error("sup_bound: gamma must be in (0,1)");
    detail::SupScanner scan(C, eps);
    return scan.sup(gamma, m / (gamma * eps));
}

// The coarse 9.5 C / eps bound (defaults gamma=1/2, m=2.3; eps clamped to
// 0.644 first, matching the sampler's clamp).
inline double simple_bound(double C, double eps) {
    detail::check_bound_domain(C, eps);
    return 9.5 * C / std::min(eps, kEpsClamp);
}

// Expected flips spent inside stage j: [gamma k_j (C_j - 1) + C_j] / (1 - C_j p),
// with (k_j, C_j) from the stage recursion.
inline double stage_bound(std::uint64_t j, const FactoryParams& params, double p) {
    if (j < 1) throw std::domain_error("stage_bound: j must be >= 1");
    StageState s = initial_stage(params);
    while (s.j < j) advance_stage(s, params.gamma);
    if (!(s.C_j * p < 1.0))
        throw std::domain_error("stage_bound: C_j * p must be < 1");
    return (params.gamma * s.k_j * (s.C_j - 1.0) + s.C_j) / (1.0 - s.C_j * p);
}

// P(stage j is reached) <= exp(-(j-1) gamma eps k) (1-Cp)/(1-(Cp)^k),
// capped at 1 (the formula is vacuous for j=1, where the stage always runs).
inline double stage_reach_probability_bound(std::uint64_t j, const FactoryParams& params,
                                            double p) {
    if (j < 1) throw std::domain_error("stage_reach_probability_bound: j must be >= 1");
    if (!(p >= 0.0 && params.C * p < 1.0))
        throw std::domain_error("stage_reach_probability_bound: need 0 <= p and Cp < 1");
    const double cp = params.C * p;
    const double ruin = p == 0.0 ? 1.0 : (1.0 - cp) / (1.0 - std::pow(cp, params.k));
    const double decay =
        std::exp(-static_cast<double>(j - 1) * params.gamma * params.eps * params.k);
    return std::min(1.0, decay * ruin);
}

// Lower bound on sup_p E[T] for ANY factory with this (C, eps), from the
// sequential-estimation argument evaluated at the worst-case p = (1-eps)/C:
//   E[T] >= (C/16)(3/4)(1-sqrt(eps))^2 ln(7) (1-(1-eps)/C) / (e^2 eps).
inline double lower_bound(double C, double eps) {
    detail::check_bound_domain(C, eps);
    const double a = 1.0 - std::sqrt(eps);
    const double one_minus_p = 1.0 - (1.0 - eps) / C;
    return (C / 16.0) * 0.75 * a * a * std::log(7.0) * one_minus_p /
           (std::exp(2.0) * eps);
}

// The simplified 0.004 C / eps form quoted for eps <= 1/2. Informational
// only: the proof-chain constant above is the ground truth here and the two
// do not coincide across eps.
inline double lower_bound_abstract(double C, double eps) {
    detail::check_bound_domain(C, eps);
    return 0.004 * C / eps;
}

struct OptimizedParams {
    double m_star = 0.0;
    double gamma_star = 0.0;
    double k_star = 0.0;
    double bound_value = 0.0; // sup over p at the optimum
};

// Minimizes sup_bound over m in [0.5, 6], gamma in [0.05, 0.95]: coarse grid
// at step 0.01 (infeasible r >= 1 points skipped), then deterministic
// pattern-descent refinement to ~1e-4 relative. Pure function of (C, eps).
inline OptimizedParams optimize_params(double C, double eps, unsigned threads = 0) {
    detail::check_bound_domain(C, eps);
    if (eps > kEpsClamp)
        throw std::domain_error("optimize_params: eps must be <= 0.644 (clamp first)");
    constexpr double kMLo = 0.5, kMHi = 6.0;
    constexpr double kGLo = 0.05, kGHi = 0.95;
    constexpr double kStep = 0.01;
    const auto m_count = static_cast<std::size_t>(std::lround((kMHi - kMLo) / kStep)) + 1;
    const auto g_count = static_cast<std::size_t>(std::lround((kGHi - kGLo) / kStep)) + 1;

    detail::SupScanner scan(C, eps);
    auto objective = [&](double m, double g) -> double {
        const double k = m / (g * eps);
        const double r = bound_rate(eps, g, k);
        if (!(r < 1.0)) return std::numeric_limits<double>::infinity();
        return scan.sup(g, k);
    };

    // Row-parallel coarse scan; reduction runs in index order so the result
    // is independent of the thread count.
    std::vector<double> row_best(m_count, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> row_arg(m_count, 0);
    unsigned t = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
    t = std::min<unsigned>(t, static_cast<unsigned>(m_count));
    std::vector<std::thread> workers;
    std::atomic<std::size_t> next_row{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t mi = next_row.fetch_add(1);
            if (mi >= m_count) return;
            const double m = kMLo + kStep * static_cast<double>(mi);
            for (std::size_t gi = 0; gi < g_count; ++gi) {
                const double g = kGLo + kStep * static_cast<double>(gi);
                const double v = objective(m, g);
                if (v < row_best[mi]) {
                    row_best[mi] = v;
                    row_arg[mi] = gi;
                }
            }
        }
    };
    for (unsigned w = 0; w < t; ++w) workers.emplace_back(worker);
    for (auto& th : workers) th.join();

    std::size_t best_mi = 0;
    for (std::size_t mi = 1; mi < m_count; ++mi)
        if (row_best[mi] < row_best[best_mi]) best_mi = mi;
    if (!std::isfinite(row_best[best_mi]))
        throw InfeasibleBoundError("optimize_params: no feasible (m, gamma) found");

    double m = kMLo + kStep * static_cast<double>(best_mi);
    double g = kGLo + kStep * static_cast<double>(row_arg[best_mi]);
    double best = row_best[best_mi];

    // Pattern descent: probe +-step on each coordinate, halve the step when
    // stuck; stops well below 1e-4 relative movement of the objective.
    double step = kStep;
    while (step > 1e-6) {
        bool moved = false;
        const double cand_m[2] = {std::max(kMLo, m - step), std::min(kMHi, m + step)};
        for (const double mm : cand_m) {
            const double v = objective(mm, g);
            if (v < best) {
                best = v;
                m = mm;
                moved = true;
            }
        }
        const double cand_g[2] = {std::max(kGLo, g - step), std::min(kGHi, g + step)};
        for (const double gg : cand_g) {
            const double v = objective(m, gg);
            if (v < best) {
                best = v;
                g = gg;
                moved = true;
            }
        }
        if (!moved) step *= 0.5;
    }

    return {m, g, m / (g * eps), best};
}

} // namespace linbf
