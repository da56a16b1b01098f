#include "linbf/linear_factory.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "gtest/gtest.h"

namespace linbf {
namespace {

TEST(MakeParams, DefaultsGiveKOf4Point6OverEps) {
    const FactoryParams p = make_params(2.0, 0.2);
    EXPECT_DOUBLE_EQ(p.gamma, 0.5);
    EXPECT_DOUBLE_EQ(p.m, 2.3);
    EXPECT_DOUBLE_EQ(p.k, 23.0);
    EXPECT_TRUE(p.bound_feasible);
    EXPECT_NEAR(p.r, 0.401035374891215, 1e-15); // exp(-2.3) (1-1/2)^-2
}

TEST(MakeParams, ClampsEps) {
    const FactoryParams p = make_params(2.0, 0.9);
    EXPECT_DOUBLE_EQ(p.eps, 0.644);
    EXPECT_DOUBLE_EQ(p.k, 2.3 / (0.5 * 0.644)); // k from post-clamp eps
}

TEST(MakeParams, CustomMAndGamma) {
    const FactoryParams p = make_params(2.0, 0.2, 0.463, 2.31);
    EXPECT_NEAR(p.k, 24.946004319654424, 1e-12);
    EXPECT_NEAR(p.k * p.gamma * p.eps, p.m, p.m * 1e-15);
}

TEST(MakeParams, DomainErrors) {
    EXPECT_THROW(make_params(1.0, 0.2), std::domain_error);
    EXPECT_THROW(make_params(0.5, 0.2), std::domain_error);
    EXPECT_THROW(make_params(2.0, 0.0), std::domain_error);
    EXPECT_THROW(make_params(2.0, 1.0), std::domain_error);
    EXPECT_THROW(make_params(2.0, 1.3), std::domain_error);
}

TEST(MakeParams, InfeasibleBoundIsAWarningNotAnError) {
    // r = exp(-m)(1-gamma)^-2 = e^-1 * 4 > 1: sampler valid, bound absent.
    const FactoryParams p = make_params(2.0, 0.2, 0.5, 1.0);
    EXPECT_FALSE(p.bound_feasible);
    EXPECT_GT(p.r, 1.0);
    SimulatedCoin coin(0.4, {1, 1});
    UniformSource aux({1, 0});
    EXPECT_NO_THROW(sample(p, coin, aux));
}

// One step of the exponent kernel preserves the target mean: the series
//   p (Cp)^(i-1) + (1-p) sum_{j>=0} (Cp)^(i+j) (C-1) C^(-j-1)
// summed directly must equal (Cp)^i.
TEST(MartingaleIdentity, ExponentKernelOneStep) {
    const double eps = 0.2;
    for (double C : {1.5, 2.0, 5.0, 20.0}) {
        const double pmax = (1.0 - eps) / C;
        for (double frac : {0.2, 0.6, 1.0}) {
            const double p = frac * pmax;
            for (int i = 1; i <= 50; ++i) {
                const double cp = C * p;
                const double target = std::pow(cp, i);
                double lhs = p * std::pow(cp, i - 1);
                double term = std::pow(cp, i) * (C - 1.0) / C; // j = 0
                double series = 0.0;
                for (int j = 0; j < 100000 && term > series * 1e-20; ++j) {
                    series += term;
                    term *= p; // (Cp)/C
                }
                lhs += (1.0 - p) * series;
                ASSERT_NEAR(lhs, target, 1e-12 * target)
                    << "C=" << C << " p=" << p << " i=" << i;
            }
        }
    }
}

// The thinning kernel preserves the mean exactly: (1/alpha)(alpha x) = x,
// with alpha = (1 + gamma eps_j)^i computed in log space at the i ~ k_j
// scale the sampler actually visits (i up to beyond 10^4 by stage 11).
TEST(MartingaleIdentity, ThinningKernelExact) {
    const FactoryParams params = make_params(2.0, 0.2);
    StageState s = initial_stage(params);
    std::uint64_t max_i_seen = 0;
    for (int j = 1; j <= 11; ++j) {
        const auto i = static_cast<std::uint64_t>(std::ceil(s.k_j));
        max_i_seen = std::max(max_i_seen, i);
        const double alpha =
            std::exp(static_cast<double>(i) * std::log1p(params.gamma * s.eps_j));
        for (double scale : {1.0, 0.37}) {
            const double x = scale / alpha;
            const double mean = (1.0 / alpha) * (alpha * x) + (1.0 - 1.0 / alpha) * 0.0;
            ASSERT_NEAR(mean, x, 1e-15 * x) << "j=" << j << " i=" << i;
        }
        advance_stage(s, params.gamma);
    }
    EXPECT_GE(max_i_seen, 10000u);
}

TEST(StageRecursion, ProductKEpsConstantOver60Stages) {
    for (double gamma : {0.3, 0.463, 0.5, 0.7}) {
        const FactoryParams params = make_params(2.0, 0.2, gamma, 2.31);
        StageState s = initial_stage(params);
        const double product = params.k * params.eps;
        for (int j = 1; j <= 60; ++j) {
            ASSERT_NEAR(s.k_j * s.eps_j, product, 1e-12 * product) << "j=" << j;
            advance_stage(s, gamma);
        }
    }
}

TEST(StageRecursion, SlackShrinksByAtMostGammaPerStage) {
    // at the worst-case p: 1 - C_{j+1} p >= (1 - C_j p)(1 - gamma),
    // and C_j p <= 1 - eps_j throughout.
    for (double C : {1.5, 2.0, 20.0}) {
        for (double eps : {0.05, 0.2, 0.5}) {
            for (double gamma : {0.3, 0.5, 0.7}) {
                const FactoryParams params = make_params(C, eps, gamma);
                const double p = (1.0 - eps) / C;
                StageState s = initial_stage(params);
                double d_prev = 1.0 - s.C_j * p;
                for (int j = 1; j <= 60; ++j) {
                    const double d = 1.0 - s.C_j * p;
                    ASSERT_LE(s.C_j * p, 1.0 - s.eps_j + 1e-12) << "j=" << j;
                    if (j > 1) {
                        ASSERT_GE(d, d_prev * (1.0 - gamma) * (1.0 - 1e-12)) << "j=" << j;
                    }
                    d_prev = d;
                    advance_stage(s, gamma);
                }
            }
        }
    }
}

TEST(Sample, PZeroAlwaysOutputsZero) {
    const FactoryParams params = make_params(2.0, 0.2);
    for (std::uint64_t r = 0; r < 500; ++r) {
        SimulatedCoin coin(0.0, {3, 2 * r + 1});
        UniformSource aux({3, 2 * r});
        const RunRecord rec = sample(params, coin, aux);
        ASSERT_FALSE(rec.output);
        ASSERT_GE(rec.stages_entered, 1u);
    }
}

TEST(Sample, OutputMeanMatchesCp) {
    // C=2, eps=0.2, p=0.4: mean within 0.8 +- 4 sqrt(0.8*0.2/1e5).
    const FactoryParams params = make_params(2.0, 0.2);
    const RandomSeed base{7, 0};
    const SampleSummary sum = sample_many(
        params, [&](std::uint64_t r) { return SimulatedCoin(0.4, coin_seed_for(base, r)); },
        base, 100000);
    EXPECT_NEAR(sum.output_mean(), 0.8, 0.0051);
}

TEST(SampleMany, SingleRunHasZeroSd) {
    const FactoryParams params = make_params(2.0, 0.2);
    const RandomSeed base{11, 0};
    const SampleSummary sum = sample_many(
        params, [&](std::uint64_t r) { return SimulatedCoin(0.3, coin_seed_for(base, r)); },
        base, 1);
    EXPECT_EQ(sum.flips.count(), 1u);
    EXPECT_EQ(sum.flips.sd(), 0.0);
}

TEST(SampleMany, ThreadCountDoesNotChangeTheResult) {
    const FactoryParams params = make_params(2.0, 0.2, 0.463, 2.31);
    const RandomSeed base{13, 0};
    auto run = [&](unsigned threads) {
        return sample_many(
            params,
            [&](std::uint64_t r) { return SimulatedCoin(0.4, coin_seed_for(base, r)); }, base,
            5000, threads);
    };
    const SampleSummary a = run(1);
    const SampleSummary b = run(4);
    const SampleSummary c = run(7);
    EXPECT_EQ(a.ones, b.ones);
    EXPECT_EQ(a.flips.sum(), b.flips.sum());
    EXPECT_EQ(a.flips.sum_sq(), b.flips.sum_sq());
    EXPECT_EQ(a.flips.max(), b.flips.max());
    EXPECT_EQ(a.flips.sum(), c.flips.sum());
    EXPECT_EQ(a.max_stages, c.max_stages);
}

TEST(SampleMany, MeanFlipsNearPublishedC2Row) {
    // C=2 benchmark row: published experimental mean 28; worst-case p.
    const FactoryParams params = make_params(2.0, 0.2, 0.463, 2.31);
    const RandomSeed base{17, 0};
    const SampleSummary sum = sample_many(
        params, [&](std::uint64_t r) { return SimulatedCoin(0.4, coin_seed_for(base, r)); },
        base, 10000);
    EXPECT_NEAR(sum.flips.mean(), 28.0, 2.8);
}

TEST(SampleMany, RejectsZeroRuns) {
    const FactoryParams params = make_params(2.0, 0.2);
    const RandomSeed base{19, 0};
    EXPECT_THROW(sample_many(
                     params,
                     [&](std::uint64_t r) { return SimulatedCoin(0.4, coin_seed_for(base, r)); },
                     base, 0),
                 std::domain_error);
}

TEST(Sample, StreamCoinExhaustionPropagates) {
    const FactoryParams params = make_params(2.0, 0.2);
    std::istringstream in("1");
    StreamCoin coin(in);
    UniformSource aux({23, 0});
    EXPECT_THROW(
        {
            for (int i = 0; i < 100; ++i) sample(params, coin, aux);
        },
        StreamExhaustedError);
}

} // namespace
} // namespace linbf
