#include "linbf/estimator.hpp"

#include <cmath>

#include "gtest/gtest.h"

namespace linbf {
namespace {

TEST(EstimateP, MinimalDrawCountGivesOneOverC) {
    // p = 1 makes every factory output 1 in a single flip, so the run stops
    // at exactly A = 4 and p_hat = 4/(4C) = 1/C.
    const FactoryParams params = make_params(2.0, 0.2);
    SimulatedCoin coin(1.0, {1, 1});
    UniformSource aux({1, 0});
    const EstimateRecord rec = estimate_p(params, coin, aux);
    EXPECT_EQ(rec.draws, 4u);
    EXPECT_DOUBLE_EQ(rec.p_hat, 0.5);
    EXPECT_EQ(rec.total_flips, 4u);
}

TEST(EstimateP, GuardTripsOnPZero) {
    const FactoryParams params = make_params(2.0, 0.2);
    SimulatedCoin coin(0.0, {2, 1});
    UniformSource aux({2, 0});
    EXPECT_THROW(estimate_p(params, coin, aux, 1000), GuardExceededError);
}

TEST(EstimateP, FlipAccountingIsExact) {
    const FactoryParams params = make_params(2.0, 0.2);
    for (std::uint64_t r = 0; r < 50; ++r) {
        SimulatedCoin coin(0.4, {3, 2 * r + 1});
        UniformSource aux({3, 2 * r});
        const std::uint64_t before = coin.flips_used();
        const EstimateRecord rec = estimate_p(params, coin, aux);
        EXPECT_EQ(rec.total_flips, coin.flips_used() - before);
        EXPECT_GE(rec.draws, 4u);
        EXPECT_DOUBLE_EQ(rec.p_hat, 4.0 / (2.0 * static_cast<double>(rec.draws)));
    }
}

// A is negative binomial(4, Cp): E[A] = 4/(Cp), Var[A] = 4(1-Cp)/(Cp)^2.
TEST(EstimateP, DrawCountMomentsMatchNegativeBinomial) {
    const FactoryParams params = make_params(2.0, 0.2);
    const double p = 0.4, cp = 0.8;
    const int n = 10000;
    double sum = 0.0, sum_sq = 0.0;
    for (std::uint64_t r = 0; r < static_cast<std::uint64_t>(n); ++r) {
        SimulatedCoin coin(p, {5, 2 * r + 1});
        UniformSource aux({5, 2 * r});
        const auto a = static_cast<double>(estimate_p(params, coin, aux).draws);
        sum += a;
        sum_sq += a * a;
    }
    const double mean = sum / n;
    const double var = (sum_sq - sum * sum / n) / (n - 1);
    EXPECT_NEAR(mean, 4.0 / cp, 0.1);                      // 5 +- 0.1
    const double nb_var = 4.0 * (1.0 - cp) / (cp * cp);    // 1.25
    EXPECT_NEAR(var, nb_var, 0.2 * nb_var);
}

TEST(EstimateP, CoverageMeetsChebyshevGuarantee) {
    // (sqrt(eps), 1/4)-approximation: at least 3/4 of estimates fall in
    // p (1 +- sqrt(eps)).
    const FactoryParams params = make_params(2.0, 0.2);
    const double p = 0.4;
    const double half = std::sqrt(0.2);
    const int n = 10000;
    int covered = 0;
    for (std::uint64_t r = 0; r < static_cast<std::uint64_t>(n); ++r) {
        SimulatedCoin coin(p, {7, 2 * r + 1});
        UniformSource aux({7, 2 * r});
        const double ph = estimate_p(params, coin, aux).p_hat;
        covered += ph >= p * (1.0 - half) && ph <= p * (1.0 + half);
    }
    EXPECT_GE(static_cast<double>(covered) / n, 0.75);
}

TEST(ExpectedFlipCost, ComposesBoundAndMeasuredForms) {
    const FactoryParams params = make_params(2.0, 0.2);
    const double p = (1.0 - params.eps) / params.C;
    const double per_call = precise_bound({params.C, params.eps, params.gamma, params.k, p});
    EXPECT_DOUBLE_EQ(expected_flip_cost(params, p), 4.0 / (1.0 - params.eps) * per_call);
    EXPECT_DOUBLE_EQ(expected_flip_cost(params, 0.4, 28.0), 5.0 * 28.0);
    EXPECT_THROW(expected_flip_cost(params, 0.0), std::domain_error);
}

TEST(ExpectedFlipCost, MatchesInstrumentedRuns) {
    // measured total flips per estimate vs 4/(Cp) x measured per-call mean
    const FactoryParams params = make_params(2.0, 0.2);
    const double p = 0.4;
    const int n = 4000;
    double total_flips = 0.0, total_draws = 0.0;
    for (std::uint64_t r = 0; r < static_cast<std::uint64_t>(n); ++r) {
        SimulatedCoin coin(p, {11, 2 * r + 1});
        UniformSource aux({11, 2 * r});
        const EstimateRecord rec = estimate_p(params, coin, aux);
        total_flips += static_cast<double>(rec.total_flips);
        total_draws += static_cast<double>(rec.draws);
    }
    const double per_call_mean = total_flips / total_draws;
    const double predicted = expected_flip_cost(params, p, per_call_mean);
    EXPECT_NEAR(total_flips / n, predicted, 0.10 * predicted);
}

} // namespace
} // namespace linbf
