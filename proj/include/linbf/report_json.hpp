#pragma once

#include <json.hpp>

#include "linbf/bounds.hpp"
#include "linbf/estimator.hpp"
#include "linbf/harness.hpp"

// JSON views of the report types. nlohmann::json keeps keys sorted and
// serializes doubles in shortest round-trip form, so dumps are byte-stable
// for identical inputs.

namespace linbf {

inline void to_json(nlohmann::json& j, const FlipStats& s) {
    j = nlohmann::json{{"count", s.count()},
                       {"mean", s.mean()},
                       {"sd", s.sd()},
                       {"max", s.max()},
                       {"sum", s.sum()},
                       {"sum_sq", s.sum_sq()}};
}

inline void to_json(nlohmann::json& j, const FactoryParams& p) {
    j = nlohmann::json{{"C", p.C},           {"eps", p.eps},
                       {"gamma", p.gamma},   {"m", p.m},
                       {"k", p.k},           {"r", p.r},
                       {"bound_feasible", p.bound_feasible}};
}

inline void to_json(nlohmann::json& j, const ZTestResult& z) {
    j = nlohmann::json{{"mean", z.mean},
                       {"target", z.target},
                       {"halfwidth", z.halfwidth},
                       {"pass", z.pass}};
}

inline void to_json(nlohmann::json& j, const VerifyReport& r) {
    j = nlohmann::json{{"params", r.params}, {"p", r.p},
                       {"n", r.n},           {"seed", r.seed},
                       {"ones", r.ones},     {"flips", r.flips},
                       {"ztest", r.ztest},   {"pass", r.pass}};
}

inline void to_json(nlohmann::json& j, const BenchReport& r) {
    j = nlohmann::json{{"C", r.C},
                       {"eps", r.eps},
                       {"p", r.p},
                       {"m", r.m},
                       {"gamma", r.gamma},
                       {"k", r.k},
                       {"n", r.n},
                       {"seed", r.seed},
                       {"theory_bound", r.theory_sup_bound},
                       {"simple_bound", r.simple_bound},
                       {"empirical", r.empirical},
                       {"out_mean", r.output_mean},
                       {"ci_halfwidth", r.output_ci_halfwidth},
                       {"tb_mean", r.tb_mean},
                       {"tb_sd", r.tb_sd},
                       {"pass_mean", r.pass_mean_test},
                       {"pass_bound", r.pass_bound_test}};
}

inline void to_json(nlohmann::json& j, const Stage1Report& r) {
    j = nlohmann::json{{"params", r.params},
                       {"p", r.p},
                       {"n", r.n},
                       {"reached_k", r.reached_k},
                       {"p_k_hat", r.p_k_hat},
                       {"p_k_bound", r.p_k_bound},
                       {"tau", r.tau},
                       {"tau_bound", r.tau_bound},
                       {"pass_p_k", r.pass_p_k},
                       {"pass_tau", r.pass_tau}};
}

inline void to_json(nlohmann::json& j, const OptimizedParams& o) {
    j = nlohmann::json{{"m_star", o.m_star},
                       {"gamma_star", o.gamma_star},
                       {"k_star", o.k_star},
                       {"bound_value", o.bound_value}};
}

inline void to_json(nlohmann::json& j, const EstimateRecord& r) {
    j = nlohmann::json{{"p_hat", r.p_hat},
                       {"draws", r.draws},
                       {"total_flips", r.total_flips}};
}

} // namespace linbf
