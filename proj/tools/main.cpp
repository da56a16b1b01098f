// linbf: exact Bern(Cp) sampling from a p-coin, running-time bound
// calculators, parameter optimizer, sequential p-estimator, and a
// statistical benchmark harness.
//
// Exit codes: 0 success (and all statistical gates passed), 1 statistical
// or runtime failure, 2 usage/domain error, 3 coin stream exhausted.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "linbf/linbf.hpp"
#include "linbf/report_json.hpp"

namespace {

using linbf::detail::fmt;

struct CoinSpec {
    bool simulated = true;
    double p = 0.0;      // simulated coins
    std::string path;    // stream coins; "-" means stdin
};

CoinSpec parse_coin(const std::string& text) {
    CoinSpec spec;
    if (text.rfind("sim:p=", 0) == 0) {
        spec.simulated = true;
        try {
            spec.p = std::stod(text.substr(6));
        } catch (const std::exception&) {
            throw std::domain_error("--coin: cannot parse p in '" + text + "'");
        }
        if (!(spec.p >= 0.0 && spec.p <= 1.0))
            throw std::domain_error("--coin: p must be in [0,1]");
        return spec;
    }
    if (text.rfind("stream:", 0) == 0) {
        spec.simulated = false;
        spec.path = text.substr(7);
        if (spec.path.empty())
            throw std::domain_error("--coin: stream selector needs a path or '-'");
        return spec;
    }
    throw std::domain_error("--coin: expected sim:p=<real> or stream:<path|->, got '" + text +
                            "'");
}

// Keeps a stream coin and its backing istream alive together.
struct StreamCoinBox {
    explicit StreamCoinBox(const std::string& path) {
        if (path != "-") {
            file.open(path, std::ios::binary);
            if (!file)
                throw std::domain_error("cannot open coin stream: " + path);
        }
        coin.emplace(path == "-" ? std::cin : file);
    }

    std::ifstream file;
    std::optional<linbf::StreamCoin> coin;
};

const char* kContractNote =
    "The factory contract requires C*p <= 1-eps for the coin's (hidden) p; a "
    "violation cannot be detected at runtime and voids the Bern(C*p) output "
    "guarantee (termination still holds while C*p < 1).";

struct CommonOpts {
    double C = 2.0;
    double eps = 0.2;
    std::optional<double> gamma;
    std::optional<double> m;
    std::string coin = "sim:p=0.0";
    std::uint64_t n = 1;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    bool json = false;
};

void add_params_flags(CLI::App* cmd, CommonOpts& o, bool with_mg = true) {
    cmd->add_option("--C", o.C, "Target multiplier C (> 1)")->required();
    cmd->add_option("--eps", o.eps, "Slack: guarantees C*p <= 1-eps (clamped to 0.644)")
        ->required();
    if (with_mg) {
        cmd->add_option("--gamma", o.gamma, "Stage shrink factor in (0,1); default 0.5");
        cmd->add_option("--m", o.m, "Gate exponent m (k = m/(gamma*eps)); default 2.3");
    }
}

int run_sample(const CommonOpts& o, const std::string& factory, std::uint64_t guard) {
    const CoinSpec spec = parse_coin(o.coin);
    std::optional<StreamCoinBox> box;
    if (!spec.simulated) box.emplace(spec.path);

    linbf::FactoryParams params;
    if (factory == "linear") params = linbf::make_params(o.C, o.eps, o.gamma, o.m);

    const linbf::RandomSeed base{o.seed, 0};
    std::vector<int> outputs;
    outputs.reserve(o.n);
    linbf::FlipStats flips;
    for (std::uint64_t r = 0; r < o.n; ++r) {
        linbf::UniformSource aux(linbf::aux_seed_for(base, r));
        auto run_one = [&](auto& coin) {
            if (factory == "vn") {
                const auto res = linbf::von_neumann(coin, guard);
                outputs.push_back(res.bit ? 1 : 0);
                flips.add(res.flips);
            } else {
                const auto rec = linbf::sample(params, coin, aux);
                outputs.push_back(rec.output ? 1 : 0);
                flips.add(rec.flips);
            }
        };
        if (spec.simulated) {
            linbf::SimulatedCoin coin(spec.p, linbf::coin_seed_for(base, r));
            run_one(coin);
        } else {
            run_one(*box->coin);
        }
    }

    double mean_out = 0.0;
    for (int b : outputs) mean_out += b;
    mean_out /= static_cast<double>(outputs.size());

    if (o.json) {
        nlohmann::json j{{"factory", factory},
                         {"n", o.n},
                         {"seed", o.seed},
                         {"outputs", outputs},
                         {"output_mean", mean_out},
                         {"flips", flips}};
        if (factory == "linear") j["params"] = params;
        std::cout << j.dump() << '\n';
    } else {
        for (int b : outputs) std::cout << b << '\n';
        std::cerr << "n=" << o.n << " output_mean=" << fmt(mean_out)
                  << " flips_mean=" << fmt(flips.mean()) << " flips_sd=" << fmt(flips.sd())
                  << " flips_max=" << flips.max() << '\n';
    }
    return 0;
}

int run_bound(const CommonOpts& o, std::optional<double> at_p, bool sup) {
    const linbf::FactoryParams params = linbf::make_params(o.C, o.eps, o.gamma, o.m);
    nlohmann::json j{{"params", params},
                     {"simple_bound", linbf::simple_bound(o.C, o.eps)},
                     {"lower_bound", linbf::lower_bound(o.C, o.eps)},
                     {"lower_bound_abstract", linbf::lower_bound_abstract(o.C, o.eps)}};
    if (at_p) {
        j["p"] = *at_p;
        j["bound_at_p"] =
            linbf::precise_bound({params.C, params.eps, params.gamma, params.k, *at_p});
    }
    if (sup || !at_p)
        j["sup_bound"] = linbf::sup_bound(params.C, params.eps, params.gamma, params.m);

    if (o.json) {
        std::cout << j.dump() << '\n';
        return 0;
    }
    std::cout << "C            " << fmt(params.C) << '\n'
              << "eps          " << fmt(params.eps) << '\n'
              << "gamma        " << fmt(params.gamma) << '\n'
              << "m            " << fmt(params.m) << '\n'
              << "k            " << fmt(params.k) << '\n'
              << "r            " << fmt(params.r) << (params.bound_feasible ? "" : "  (infeasible: no finite bound)")
              << '\n';
    if (j.contains("bound_at_p"))
        std::cout << "bound(p=" << fmt(*at_p) << ")   " << fmt(j["bound_at_p"].get<double>())
                  << '\n';
    if (j.contains("sup_bound"))
        std::cout << "sup_bound    " << fmt(j["sup_bound"].get<double>()) << '\n';
    std::cout << "simple_bound " << fmt(j["simple_bound"].get<double>()) << '\n'
              << "lower_bound  " << fmt(j["lower_bound"].get<double>()) << '\n'
              << "lower_bound_abstract " << fmt(j["lower_bound_abstract"].get<double>())
              << '\n';
    return 0;
}

int run_optimize(const CommonOpts& o) {
    const linbf::OptimizedParams opt = linbf::optimize_params(o.C, o.eps, o.threads);
    if (o.json) {
        nlohmann::json j{{"C", o.C}, {"eps", o.eps}, {"optimum", opt}};
        std::cout << j.dump() << '\n';
        return 0;
    }
    std::cout << "C           " << fmt(o.C) << '\n'
              << "eps         " << fmt(o.eps) << '\n'
              << "m_star      " << fmt(opt.m_star) << '\n'
              << "gamma_star  " << fmt(opt.gamma_star) << '\n'
              << "k_star      " << fmt(opt.k_star) << '\n'
              << "bound_value " << fmt(opt.bound_value) << '\n';
    return 0;
}

int run_estimate(const CommonOpts& o, std::uint64_t guard) {
    const CoinSpec spec = parse_coin(o.coin);
    const linbf::FactoryParams params = linbf::make_params(o.C, o.eps, o.gamma, o.m);
    std::optional<StreamCoinBox> box;
    if (!spec.simulated) box.emplace(spec.path);

    const linbf::RandomSeed base{o.seed, 0};
    linbf::FlipStats draws;
    double p_hat_sum = 0.0;
    std::uint64_t total_flips = 0;
    std::uint64_t covered = 0;
    const double half = std::sqrt(params.eps);
    for (std::uint64_t r = 0; r < o.n; ++r) {
        linbf::UniformSource aux(linbf::aux_seed_for(base, r));
        linbf::EstimateRecord rec;
        if (spec.simulated) {
            linbf::SimulatedCoin coin(spec.p, linbf::coin_seed_for(base, r));
            rec = linbf::estimate_p(params, coin, aux, guard);
        } else {
            rec = linbf::estimate_p(params, *box->coin, aux, guard);
        }
        draws.add(rec.draws);
        p_hat_sum += rec.p_hat;
        total_flips += rec.total_flips;
        if (spec.simulated && rec.p_hat >= spec.p * (1.0 - half) &&
            rec.p_hat <= spec.p * (1.0 + half))
            ++covered;
    }
    const double mean_p_hat = p_hat_sum / static_cast<double>(o.n);

    nlohmann::json j{{"params", params},
                     {"n", o.n},
                     {"seed", o.seed},
                     {"mean_p_hat", mean_p_hat},
                     {"draws", draws},
                     {"total_flips", total_flips}};
    if (spec.simulated) {
        j["p_true"] = spec.p;
        j["coverage"] = static_cast<double>(covered) / static_cast<double>(o.n);
        j["coverage_halfwidth_rel"] = half;
    }
    if (o.json) {
        std::cout << j.dump() << '\n';
        return 0;
    }
    std::cout << "replicates  " << o.n << '\n'
              << "mean_p_hat  " << fmt(mean_p_hat) << '\n'
              << "mean_draws  " << fmt(draws.mean()) << '\n'
              << "sd_draws    " << fmt(draws.sd()) << '\n'
              << "total_flips " << total_flips << '\n';
    if (spec.simulated)
        std::cout << "coverage    " << fmt(j["coverage"].get<double>()) << "  (interval p*(1 +- sqrt(eps)))\n";
    return 0;
}

int run_verify(const CommonOpts& o) {
    const CoinSpec spec = parse_coin(o.coin);
    if (!spec.simulated)
        throw std::domain_error("verify: needs a sim: coin (the target C*p must be known)");
    const linbf::FactoryParams params = linbf::make_params(o.C, o.eps, o.gamma, o.m);
    const linbf::VerifyReport rep = linbf::verify_mean(params, spec.p, o.n, o.seed, o.threads);
    if (o.json) {
        std::cout << nlohmann::json(rep).dump() << '\n';
    } else {
        std::cout << "target      " << fmt(rep.ztest.target) << '\n'
                  << "out_mean    " << fmt(rep.ztest.mean) << '\n'
                  << "halfwidth   " << fmt(rep.ztest.halfwidth) << '\n'
                  << "flips_mean  " << fmt(rep.flips.mean()) << '\n'
                  << "result      " << (rep.pass ? "PASS" : "FAIL") << '\n';
    }
    return rep.pass ? 0 : 1;
}

int run_stage1(const CommonOpts& o) {
    const CoinSpec spec = parse_coin(o.coin);
    if (!spec.simulated)
        throw std::domain_error("stage1: needs a sim: coin (bounds depend on p)");
    const linbf::FactoryParams params = linbf::make_params(o.C, o.eps, o.gamma, o.m);
    const linbf::Stage1Report rep =
        linbf::instrument_stage1(params, spec.p, o.n, {o.seed, 0});
    if (o.json) {
        std::cout << nlohmann::json(rep).dump() << '\n';
    } else {
        std::cout << "p_k_hat    " << fmt(rep.p_k_hat) << "  bound " << fmt(rep.p_k_bound)
                  << "  " << (rep.pass_p_k ? "PASS" : "FAIL") << '\n'
                  << "tau_mean   " << fmt(rep.tau.mean()) << "  bound " << fmt(rep.tau_bound)
                  << "  " << (rep.pass_tau ? "PASS" : "FAIL") << '\n';
    }
    return rep.pass_p_k && rep.pass_tau ? 0 : 1;
}

int run_bench(const CommonOpts& o, const std::string& csv_path, const std::string& json_path) {
    const auto reports = linbf::run_bench(o.n, o.seed, o.threads);

    if (!csv_path.empty()) {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) throw std::domain_error("cannot open for writing: " + csv_path);
        f << linbf::bench_csv(reports);
    }
    if (!json_path.empty()) {
        std::ofstream f(json_path, std::ios::binary);
        if (!f) throw std::domain_error("cannot open for writing: " + json_path);
        f << nlohmann::json(reports).dump(2) << '\n';
    }

    bool all_pass = true;
    std::cout << "benchmark: n=" << o.n << " seed=" << o.seed
              << " p=(1-eps)/C (worst case), eps=" << fmt(linbf::kBenchEps) << '\n';
    std::cout << "C      theory   simple   emp_mean  emp_sd    emp_max  out_mean  tb_mean  tb_sd   mean  bound\n";
    for (const auto& r : reports) {
        all_pass = all_pass && r.pass_mean_test && r.pass_bound_test;
        char line[256];
        std::snprintf(line, sizeof line,
                      "%-6g %-8.4g %-8.4g %-9.4g %-9.4g %-8llu %-9.6g %-8g %-7g %-5s %s",
                      r.C, r.theory_sup_bound, r.simple_bound, r.empirical.mean(),
                      r.empirical.sd(), static_cast<unsigned long long>(r.empirical.max()),
                      r.output_mean, r.tb_mean, r.tb_sd,
                      r.pass_mean_test ? "PASS" : "FAIL",
                      r.pass_bound_test ? "PASS" : "FAIL");
        std::cout << line << '\n';
    }
    return all_pass ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("linbf: linear Bernoulli factory (exact Bern(C*p) from a "
                             "p-coin) with running-time bounds.\n") +
                 kContractNote};
    app.require_subcommand(1);

    CommonOpts sample_o, bound_o, opt_o, est_o, verify_o, stage1_o, bench_o;
    std::string factory = "linear";
    std::uint64_t vn_guard = 1ull << 20;
    std::uint64_t est_guard = linbf::kDefaultMaxDraws;

    auto* sample = app.add_subcommand("sample", "Draw factory outputs, one bit per line");
    add_params_flags(sample, sample_o);
    sample->get_option("--C")->required(false);
    sample->get_option("--eps")->required(false);
    sample->add_option("--coin", sample_o.coin, "sim:p=<real> or stream:<path|->")->required();
    sample->add_option("--n", sample_o.n, "Number of outputs")->required();
    sample->add_option("--seed", sample_o.seed, "Base seed (default 1)");
    sample->add_option("--factory", factory, "linear (default) or vn (fair bit)")
        ->check(CLI::IsMember({"linear", "vn"}));
    sample->add_option("--guard", vn_guard, "vn max flips per run; 0 disables");
    sample->add_flag("--json", sample_o.json, "JSON to stdout");

    auto* bound = app.add_subcommand("bound", "Evaluate running-time bounds");
    add_params_flags(bound, bound_o);
    double bound_p = 0.0;
    bool bound_sup = false;
    auto* popt = bound->add_option("--p", bound_p, "Evaluate the precise bound at this p");
    bound->add_flag("--sup", bound_sup, "Maximize the precise bound over p (default)");
    bound->add_flag("--json", bound_o.json, "JSON to stdout");

    auto* optimize = app.add_subcommand("optimize", "Minimize the sup bound over (m, gamma)");
    add_params_flags(optimize, opt_o, /*with_mg=*/false);
    optimize->add_option("--threads", opt_o.threads, "Scan parallelism (0 = auto)");
    optimize->add_flag("--json", opt_o.json, "JSON to stdout");

    auto* estimate = app.add_subcommand("estimate", "Sequential p-estimate from factory draws");
    add_params_flags(estimate, est_o);
    estimate->add_option("--coin", est_o.coin, "sim:p=<real> or stream:<path|->")->required();
    estimate->add_option("--n", est_o.n, "Replicates")->required();
    estimate->add_option("--seed", est_o.seed, "Base seed (default 1)");
    estimate->add_option("--guard", est_guard, "Max factory draws per estimate");
    estimate->add_flag("--json", est_o.json, "JSON to stdout");

    auto* verify = app.add_subcommand(
        "verify", "z-test factory output mean against min(C*p, 1) (= C*p under the contract)");
    add_params_flags(verify, verify_o);
    verify->add_option("--coin", verify_o.coin, "sim:p=<real> (target must be known)")
        ->required();
    verify->add_option("--n", verify_o.n, "Runs")->required();
    verify->add_option("--seed", verify_o.seed, "Base seed (default 1)");
    verify->add_option("--threads", verify_o.threads, "Replicate parallelism (0 = auto)");
    verify->add_flag("--json", verify_o.json, "JSON to stdout");

    auto* stage1 = app.add_subcommand("stage1", "First-stage walk instrumentation vs bounds");
    add_params_flags(stage1, stage1_o);
    stage1->add_option("--coin", stage1_o.coin, "sim:p=<real>")->required();
    stage1->add_option("--n", stage1_o.n, "Runs")->required();
    stage1->add_option("--seed", stage1_o.seed, "Base seed (default 1)");
    stage1->add_flag("--json", stage1_o.json, "JSON to stdout");

    auto* bench = app.add_subcommand("bench", "Reference benchmark table (4 rows, eps=0.2)");
    bench_o.n = 10000;
    bench->add_option("--n", bench_o.n, "Runs per row (default 10000)");
    bench->add_option("--seed", bench_o.seed, "Base seed (default 1)");
    bench->add_option("--threads", bench_o.threads, "Replicate parallelism (0 = auto)");
    std::string csv_path, json_path;
    bench->add_option("--csv", csv_path, "Write CSV to this path");
    bench->add_option("--json", json_path, "Write JSON to this path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sample->parsed()) {
            if (factory == "linear" && (!sample->count("--C") || !sample->count("--eps")))
                throw std::domain_error("sample: --C and --eps are required for --factory linear");
            return run_sample(sample_o, factory, vn_guard);
        }
        if (bound->parsed())
            return run_bound(bound_o, popt->count() ? std::optional<double>(bound_p)
                                                    : std::nullopt,
                             bound_sup);
        if (optimize->parsed()) return run_optimize(opt_o);
        if (estimate->parsed()) return run_estimate(est_o, est_guard);
        if (verify->parsed()) return run_verify(verify_o);
        if (stage1->parsed()) return run_stage1(stage1_o);
        if (bench->parsed()) return run_bench(bench_o, csv_path, json_path);
    } catch (const linbf::StreamExhaustedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    } catch (const linbf::StreamFormatError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
