#include "linbf/harness.hpp"

#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "linbf/report_json.hpp"

namespace linbf {
namespace {

TEST(ZTest, HalfwidthUsesPinnedCritical) {
    const ZTestResult z = z_test_mean(0.8, 0.8, 100000);
    EXPECT_NEAR(z.halfwidth, 3.891 * std::sqrt(0.8 * 0.2 / 100000.0), 1e-15);
    EXPECT_TRUE(z.pass);
    EXPECT_FALSE(z_test_mean(0.8 + 2.0 * z.halfwidth, 0.8, 100000).pass);
    EXPECT_TRUE(z_test_mean(0.8 + 0.5 * z.halfwidth, 0.8, 100000).pass);
}

TEST(VerifyMean, TrivialPassAtPZero) {
    const FactoryParams params = make_params(3.0, 0.2);
    const VerifyReport rep = verify_mean(params, 0.0, 2000, 42);
    EXPECT_EQ(rep.ones, 0u);
    EXPECT_TRUE(rep.pass);
}

TEST(VerifyMean, PassesAtInteriorP) {
    const FactoryParams params = make_params(2.0, 0.2);
    const VerifyReport rep = verify_mean(params, 0.4, 20000, 7);
    EXPECT_TRUE(rep.pass);
    EXPECT_NEAR(rep.ztest.target, 0.8, 1e-15);
}

// Mutation control: a sampler with the exponent decrement dropped
// (i <- i + (1-B)G instead of i <- i - 1 + (1-B)G) can never emit 1, and the
// z-test must catch it.
bool corrupted_sample(const FactoryParams& params, SimulatedCoin& coin, UniformSource& aux) {
    StageState s = initial_stage(params);
    for (;;) {
        do {
            const bool heads = coin.flip();
            const std::uint64_t jump = geometric(aux, (s.C_j - 1.0) / s.C_j);
            s.i = s.i + (heads ? 0 : jump); // BUG under test: decrement skipped
        } while (s.i != 0 && static_cast<double>(s.i) < s.k_j);
        if (s.i == 0) return true;
        const double survive =
            std::exp(-static_cast<double>(s.i) * std::log1p(params.gamma * s.eps_j));
        if (!bernoulli_known(aux, survive)) return false;
        advance_stage(s, params.gamma);
    }
}

TEST(VerifyMean, MutationIsCaught) {
    const FactoryParams params = make_params(2.0, 0.2);
    const RandomSeed base{77, 0};
    const std::uint64_t n = 2000;
    std::uint64_t ones = 0;
    for (std::uint64_t r = 0; r < n; ++r) {
        SimulatedCoin coin(0.4, coin_seed_for(base, r));
        UniformSource aux(aux_seed_for(base, r));
        ones += corrupted_sample(params, coin, aux) ? 1 : 0;
    }
    const ZTestResult z = z_test_mean(static_cast<double>(ones) / n, 0.8, n);
    EXPECT_FALSE(z.pass);
}

TEST(VerifyMean, DiagnosticTargetIsCappedAtOne) {
    // contract-violating configuration: Cp = 1.2 > 1; the diagnostic targets
    // min(Cp, 1)
    const FactoryParams params = make_params(2.0, 0.2);
    const VerifyReport rep = verify_mean(params, 0.6, 200, 3);
    EXPECT_DOUBLE_EQ(rep.ztest.target, 1.0);
}

TEST(InstrumentStage1, PZeroNeverExitsLow) {
    const FactoryParams params = make_params(2.0, 0.2);
    const Stage1Report rep = instrument_stage1(params, 0.0, 2000, {5, 0});
    EXPECT_DOUBLE_EQ(rep.p_k_hat, 1.0);
    EXPECT_DOUBLE_EQ(rep.p_k_bound, 1.0);
    EXPECT_TRUE(rep.pass_p_k);
    EXPECT_TRUE(rep.pass_tau);
}

TEST(InstrumentStage1, RuinAndStoppingBoundsHold) {
    const FactoryParams params = make_params(2.0, 0.2); // gamma=.5, k=23
    for (double p : {0.2, 0.4}) {
        const Stage1Report rep = instrument_stage1(params, p, 20000, {9, 0});
        EXPECT_TRUE(rep.pass_p_k) << "p=" << p;
        EXPECT_TRUE(rep.pass_tau) << "p=" << p;
        const double cp = 2.0 * p;
        EXPECT_NEAR(rep.p_k_bound, (1.0 - cp) / (1.0 - std::pow(cp, 23.0)), 1e-12);
    }
}

TEST(Bench, RowsArePopulatedAndPass) {
    const auto reports = run_bench(300, 1);
    ASSERT_EQ(reports.size(), 4u);
    double prev_C = 0.0;
    for (const auto& r : reports) {
        EXPECT_GT(r.C, prev_C);
        prev_C = r.C;
        EXPECT_DOUBLE_EQ(r.eps, 0.2);
        EXPECT_DOUBLE_EQ(r.p, (1.0 - 0.2) / r.C);
        EXPECT_EQ(r.n, 300u);
        EXPECT_GT(r.theory_sup_bound, 0.0);
        EXPECT_GT(r.simple_bound, r.theory_sup_bound); // 9.5C/eps is the loose one
        EXPECT_EQ(r.empirical.count(), 300u);
        EXPECT_TRUE(r.pass_mean_test);
        EXPECT_TRUE(r.pass_bound_test);
    }
}

TEST(Bench, ReportsAreByteStable) {
    const auto a = run_bench(200, 9);
    const auto b = run_bench(200, 9);
    EXPECT_EQ(bench_csv(a), bench_csv(b));
    EXPECT_EQ(nlohmann::json(a).dump(), nlohmann::json(b).dump());
    // thread count must not change the bytes either
    const auto c = run_bench(200, 9, 3);
    EXPECT_EQ(bench_csv(a), bench_csv(c));
}

TEST(Bench, CsvHeaderIsTheDocumentedSchema) {
    const auto reports = run_bench(50, 3);
    const std::string csv = bench_csv(reports);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "C,eps,p,m,gamma,k,n,theory_bound,simple_bound,emp_mean,emp_sd,emp_max,"
              "out_mean,ci_halfwidth,tb_mean,tb_sd,pass_mean,pass_bound");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5); // header + 4 rows
}

TEST(Bench, SeedChangesTheNumbers) {
    const auto a = run_bench(200, 1);
    const auto b = run_bench(200, 2);
    EXPECT_NE(a[0].empirical.sum(), b[0].empirical.sum());
}

} // namespace
} // namespace linbf
