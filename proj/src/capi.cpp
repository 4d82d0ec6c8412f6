#include "dsaht/dsaht.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "dsaht/capacity.hpp"
#include "dsaht/channels.hpp"
#include "dsaht/dp.hpp"
#include "dsaht/objectives.hpp"
#include "dsaht/serialize.hpp"
#include "dsaht/unstructured.hpp"

struct dsaht_problem {
    dsaht::ProblemSpec spec;
    dsaht::Channel channel;
    std::string source;
};

struct dsaht_policy {
    dsaht::PolicyTree tree;
};

namespace {

using namespace dsaht;

thread_local std::string last_error;

dsaht_status status_of(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return DSAHT_INVALID_ARGUMENT;
        case ErrorCode::DimensionMismatch: return DSAHT_DIMENSION_MISMATCH;
        case ErrorCode::NotStochastic: return DSAHT_NOT_STOCHASTIC;
        case ErrorCode::NegativeEntry: return DSAHT_NEGATIVE_ENTRY;
        case ErrorCode::ZeroProbabilityObservation: return DSAHT_ZERO_PROBABILITY_OBSERVATION;
        case ErrorCode::ZeroProbabilityInput: return DSAHT_ZERO_PROBABILITY_INPUT;
        case ErrorCode::BudgetExceeded: return DSAHT_BUDGET_EXCEEDED;
        case ErrorCode::IncompletePolicy: return DSAHT_INCOMPLETE_POLICY;
        case ErrorCode::NotConverged: return DSAHT_NOT_CONVERGED;
        case ErrorCode::NegativeInformation: return DSAHT_NEGATIVE_INFORMATION;
    }
    return DSAHT_INTERNAL;
}

template <typename F>
dsaht_status guarded(F&& body) {
    last_error.clear();
    try {
        body();
        return DSAHT_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.code());
    } catch (const nlohmann::json::exception& e) {
        last_error = e.what();
        return DSAHT_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return DSAHT_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return DSAHT_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) fail(ErrorCode::InvalidArgument, what);
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void emit(char** out, const Json& j) {
    if (out) *out = dup(dump_json(j));
}

ProblemSpec to_spec(const dsaht_spec* s) {
    require(s != nullptr, "spec is null");
    ProblemSpec spec{s->x1_size, s->x2_size, s->z_size, s->m1, s->m2,
                     s->log_base == DSAHT_NATS ? LogBase::Nats : LogBase::Bits};
    spec.validate();
    return spec;
}

Caps to_caps(const dsaht_caps* c) {
    Caps caps;
    if (!c) return caps;
    require(c->max_nodes > 0 && c->max_strategies > 0 && c->max_histories > 0 && c->max_policies > 0,
            "caps must be positive");
    caps.max_nodes = c->max_nodes;
    caps.max_strategies = c->max_strategies;
    caps.max_histories = c->max_histories;
    caps.max_policies = c->max_policies;
    return caps;
}

LambdaWeights to_lambda(const double* l) {
    require(l != nullptr, "lambda is null");
    LambdaWeights w{l[0], l[1], l[2]};
    w.validate();
    return w;
}

void check_policy_matches(const dsaht_problem* problem, const dsaht_policy* policy) {
    require(problem && policy, "null handle");
    if (!(policy->tree.spec() == problem->spec))
        fail(ErrorCode::DimensionMismatch, "policy was built for a different problem size");
}

Json strategy_json(const UnstructuredStrategy& s) {
    Json j;
    j["user1"] = s.user1;
    j["user2"] = s.user2;
    return j;
}

template <typename R>
Json deviation_entry(double tolerance, const R& report) {
    Json j = to_json(report);
    j["tolerance"] = tolerance;
    return j;
}

}  // namespace

extern "C" {

const char* dsaht_version(void) { return "0.1.0"; }

const char* dsaht_status_string(dsaht_status status) {
    switch (status) {
        case DSAHT_OK: return "ok";
        case DSAHT_INVALID_ARGUMENT: return "InvalidArgument";
        case DSAHT_DIMENSION_MISMATCH: return "DimensionMismatch";
        case DSAHT_NOT_STOCHASTIC: return "NotStochastic";
        case DSAHT_NEGATIVE_ENTRY: return "NegativeEntry";
        case DSAHT_ZERO_PROBABILITY_OBSERVATION: return "ZeroProbabilityObservation";
        case DSAHT_ZERO_PROBABILITY_INPUT: return "ZeroProbabilityInput";
        case DSAHT_BUDGET_EXCEEDED: return "BudgetExceeded";
        case DSAHT_INCOMPLETE_POLICY: return "IncompletePolicy";
        case DSAHT_NOT_CONVERGED: return "NotConverged";
        case DSAHT_NEGATIVE_INFORMATION: return "NegativeInformation";
        case DSAHT_INTERNAL: return "Internal";
    }
    return "Unknown";
}

const char* dsaht_last_error_message(void) { return last_error.c_str(); }

void dsaht_string_free(char* s) { std::free(s); }

void dsaht_caps_default(dsaht_caps* caps) {
    if (!caps) return;
    const Caps d;
    *caps = {d.max_nodes, d.max_strategies, d.max_histories, d.max_policies};
}

void dsaht_fixed_point_options_default(dsaht_fixed_point_options* options) {
    if (!options) return;
    const FixedPointOptions d;
    *options = {20, d.mode == FixedPointMode::Average ? 1 : 0, d.beta, d.tol, d.max_iter};
}

dsaht_status dsaht_problem_create(const dsaht_spec* spec, const double* q, size_t len, dsaht_problem** out) {
    return guarded([&] {
        require(out != nullptr && (q != nullptr || len == 0), "null argument");
        const auto s = to_spec(spec);
        auto ch = validate_channel(s, {q, len});
        *out = new dsaht_problem{s, std::move(ch), "matrix"};
    });
}

dsaht_status dsaht_problem_create_generated(const dsaht_spec* spec, const char* generator, dsaht_problem** out) {
    return guarded([&] {
        require(out != nullptr && generator != nullptr, "null argument");
        const auto s = to_spec(spec);
        *out = new dsaht_problem{s, make_channel(s, generator), generator};
    });
}

void dsaht_problem_destroy(dsaht_problem* problem) { delete problem; }

dsaht_status dsaht_problem_describe(const dsaht_problem* problem, char** json) {
    return guarded([&] {
        require(problem != nullptr, "null handle");
        Json j;
        j["spec"] = to_json(problem->spec);
        j["source"] = problem->source;
        j["stochastic"] = true;
        j["joint_actions"] = ActionSpace(problem->spec).size();
        j["channel"] = to_json(problem->channel);
        emit(json, j);
    });
}

dsaht_status dsaht_solve_dp(const dsaht_problem* problem, int horizon, const char* objective, const dsaht_caps* caps,
                            int exact, dsaht_policy** out, char** report) {
    return guarded([&] {
        require(problem != nullptr, "null handle");
        const auto kind = parse_cost_kind(objective ? objective : "error_probability");
        const auto c = to_caps(caps);
        const auto tree = build_reachable_tree(problem->spec, problem->channel, horizon, std::nullopt, c.max_nodes);
        auto sol = backward_dp(tree, problem->channel, kind);
        if (report) {
            Json j;
            j["spec"] = to_json(problem->spec);
            j["horizon"] = horizon;
            j["objective"] = to_string(kind);
            j["restricted"] = tree.restricted();
            if (kind == CostKind::ErrorProbability) {
                j["pe_star"] = sol.policy.root_value();
                j["pe_evaluated"] = evaluate_policy_exact(sol.policy, problem->channel);
            } else {
                j["value"] = sol.policy.root_value();
            }
            if (exact) {
                const auto v = exact_dp_value<Rational>(problem->spec, problem->channel, horizon);
                j["pe_star_exact"] = to_double(v);
                j["pe_star_exact_rational"] = v.str();
            }
            Json counts = Json::array();
            for (int d = 0; d <= horizon; ++d) counts.push_back(tree.count_at_depth(d));
            j["tree_nodes_per_depth"] = std::move(counts);
            j["tree_nodes"] = tree.nodes().size();
            j["policy_nodes"] = sol.policy.nodes().size();
            j["root_action"] = to_json(sol.policy.root().action);
            emit(report, j);
        }
        if (out) *out = new dsaht_policy{std::move(sol.policy)};
    });
}

dsaht_status dsaht_policy_constant(const dsaht_problem* problem, int horizon, const int* e1, const int* e2,
                                   dsaht_policy** out) {
    return guarded([&] {
        require(problem && e1 && e2 && out, "null argument");
        JointAction a{{User::One, std::vector<int>(e1, e1 + problem->spec.m1)},
                      {User::Two, std::vector<int>(e2, e2 + problem->spec.m2)}};
        a.validate(problem->spec);
        *out = new dsaht_policy{constant_policy(problem->spec, problem->channel, horizon, a)};
    });
}

dsaht_status dsaht_policy_seeded(const dsaht_problem* problem, int horizon, uint64_t seed, dsaht_policy** out) {
    return guarded([&] {
        require(problem && out, "null argument");
        *out = new dsaht_policy{seeded_policy(problem->spec, problem->channel, horizon, seed)};
    });
}

dsaht_status dsaht_policy_from_json(const char* json, dsaht_policy** out) {
    return guarded([&] {
        require(json && out, "null argument");
        *out = new dsaht_policy{policy_from_json(Json::parse(json))};
    });
}

dsaht_status dsaht_policy_to_json(const dsaht_policy* policy, char** json) {
    return guarded([&] {
        require(policy && json, "null argument");
        emit(json, to_json(policy->tree));
    });
}

dsaht_status dsaht_policy_horizon(const dsaht_policy* policy, int* horizon) {
    return guarded([&] {
        require(policy && horizon, "null argument");
        *horizon = policy->tree.horizon();
    });
}

dsaht_status dsaht_policy_root_value(const dsaht_policy* policy, double* value) {
    return guarded([&] {
        require(policy && value, "null argument");
        *value = policy->tree.root_value();
    });
}

void dsaht_policy_destroy(dsaht_policy* policy) { delete policy; }

dsaht_status dsaht_policy_evaluate(const dsaht_problem* problem, const dsaht_policy* policy,
                                   double* error_probability) {
    return guarded([&] {
        check_policy_matches(problem, policy);
        require(error_probability != nullptr, "null argument");
        *error_probability = evaluate_policy_exact(policy->tree, problem->channel);
    });
}

dsaht_status dsaht_simulate(const dsaht_problem* problem, const dsaht_policy* policy, uint64_t trials, uint64_t seed,
                            double* estimate, double* half_width) {
    return guarded([&] {
        check_policy_matches(problem, policy);
        require(trials >= 1, "trials must be at least 1");
        const auto r = simulate_monte_carlo(policy->tree, problem->channel, trials, seed);
        if (estimate) *estimate = r.estimate;
        if (half_width) *half_width = r.half_width;
    });
}

dsaht_status dsaht_policy_evaluate_report(const dsaht_problem* problem, const dsaht_policy* policy, char** json) {
    return guarded([&] {
        check_policy_matches(problem, policy);
        Json j;
        j["spec"] = to_json(problem->spec);
        j["horizon"] = policy->tree.horizon();
        j["policy_nodes"] = policy->tree.nodes().size();
        j["error_probability"] = evaluate_policy_exact(policy->tree, problem->channel);
        emit(json, j);
    });
}

dsaht_status dsaht_simulate_report(const dsaht_problem* problem, const dsaht_policy* policy, uint64_t trials,
                                   uint64_t seed, char** json) {
    return guarded([&] {
        check_policy_matches(problem, policy);
        require(trials >= 1, "trials must be at least 1");
        const auto r = simulate_monte_carlo(policy->tree, problem->channel, trials, seed);
        const double exact = evaluate_policy_exact(policy->tree, problem->channel);
        Json j;
        j["spec"] = to_json(problem->spec);
        j["horizon"] = policy->tree.horizon();
        j["seed"] = seed;
        for (const Json part = to_json(r); auto& [k, v] : part.items()) j[k] = v;
        j["exact"] = exact;
        j["within_ci"] = std::abs(r.estimate - exact) <= r.half_width;
        emit(json, j);
    });
}

dsaht_status dsaht_oracle_unstructured(const dsaht_problem* problem, int horizon, int rational,
                                       uint64_t max_strategies, char** json) {
    return guarded([&] {
        require(problem != nullptr, "null handle");
        require(max_strategies > 0, "strategy cap must be positive");
        Json j;
        j["spec"] = to_json(problem->spec);
        j["horizon"] = horizon;
        j["rational"] = rational != 0;
        if (rational) {
            const auto r = brute_force_unstructured<Rational>(problem->spec, problem->channel, horizon, max_strategies);
            j["pe_star"] = to_double(r.min_error);
            j["pe_star_rational"] = r.min_error.str();
            j["strategies"] = r.strategies;
            j["witness"] = strategy_json(r.witness);
        } else {
            const auto r = brute_force_unstructured<double>(problem->spec, problem->channel, horizon, max_strategies);
            j["pe_star"] = r.min_error;
            j["strategies"] = r.strategies;
            j["witness"] = strategy_json(r.witness);
        }
        emit(json, j);
    });
}

dsaht_status dsaht_costs_report(const dsaht_problem* problem, const dsaht_policy* policy, char** json) {
    return guarded([&] {
        check_policy_matches(problem, policy);
        const auto& spec = problem->spec;
        const ActionSpace space(spec);
        const auto uniform = JointBelief::uniform(spec.m1, spec.m2);
        const CostKind kinds[] = {CostKind::JointEntropyDrift, CostKind::ConditionalEntropyDriftUser1,
                                  CostKind::ConditionalEntropyDriftUser2, CostKind::Ejs};
        Json table = Json::array();
        for (std::size_t a = 0; a < space.size(); ++a) {
            const auto action = space.action(a);
            Json row;
            row["index"] = a;
            row["action"] = to_json(action);
            for (auto k : kinds) {
                const auto c = instantaneous_cost(k, uniform, action, problem->channel, spec.log_base);
                row[to_string(k)] = c.value;
                if (c.saturated) row[to_string(k) + "_saturated"] = true;
            }
            table.push_back(std::move(row));
        }
        Json tele;
        for (auto k : kinds) tele[to_string(k)] = to_json(check_telescoping(policy->tree, problem->channel, k));
        Json j;
        j["spec"] = to_json(spec);
        j["horizon"] = policy->tree.horizon();
        j["belief"] = "uniform";
        j["instantaneous_costs"] = std::move(table);
        j["telescoping"] = std::move(tele);
        emit(json, j);
    });
}

dsaht_status dsaht_fixed_point(const dsaht_problem* problem, const char* cost, const dsaht_fixed_point_options* options,
                               char** json) {
    return guarded([&] {
        require(problem && cost && options, "null argument");
        const auto kind = parse_cost_kind(cost);
        const SimplexGrid grid(problem->spec.m1, problem->spec.m2, options->resolution);
        FixedPointOptions o;
        o.mode = options->average ? FixedPointMode::Average : FixedPointMode::Discounted;
        o.beta = options->beta;
        o.tol = options->tol;
        o.max_iter = options->max_iter;
        const auto r = fixed_point_solve(problem->spec, problem->channel, kind, grid, o);
        Json j;
        j["spec"] = to_json(problem->spec);
        j["cost"] = to_string(kind);
        j["beta"] = o.mode == FixedPointMode::Discounted ? Json(o.beta) : Json(nullptr);
        j["tol"] = o.tol;
        for (const Json part = to_json(r, grid, problem->spec); auto& [k, v] : part.items()) j[k] = v;
        emit(json, j);
        if (!r.converged) fail(ErrorCode::NotConverged, "fixed-point iteration did not reach the tolerance");
    });
}

dsaht_status dsaht_capacity_eval(const dsaht_problem* problem, const dsaht_policy* policy, int n, const double* lambda,
                                 int oracle, const dsaht_caps* caps, char** json) {
    return guarded([&] {
        check_policy_matches(problem, policy);
        const auto c = to_caps(caps);
        const auto w = to_lambda(lambda);
        Json j;
        j["spec"] = to_json(problem->spec);
        j["n"] = n;
        const auto d = evaluate_In(policy->tree, problem->channel, n, w, c.max_nodes);
        for (const Json part = to_json(d); auto& [k, v] : part.items()) j[k] = v;
        if (oracle) {
            const auto f = full_history_In(policy->tree, problem->channel, n, w, c.max_histories);
            Json o = to_json(f);
            o.erase("bound_type");
            double dev = std::abs(d.weighted - f.weighted);
            for (std::size_t t = 0; t < d.i1_t.size(); ++t) {
                dev = std::max(dev, std::abs(d.i1_t[t] - f.i1_t[t]));
                dev = std::max(dev, std::abs(d.i2_t[t] - f.i2_t[t]));
                dev = std::max(dev, std::abs(d.i3_t[t] - f.i3_t[t]));
            }
            o["max_deviation"] = dev;
            j["full_history"] = std::move(o);
        }
        emit(json, j);
    });
}

dsaht_status dsaht_capacity_search(const dsaht_problem* problem, int n, const double* lambda, const dsaht_caps* caps,
                                   char** json) {
    return guarded([&] {
        require(problem != nullptr, "null handle");
        const auto r = search_Cn_lambda(problem->spec, problem->channel, n, to_lambda(lambda), to_caps(caps));
        Json j;
        j["spec"] = to_json(problem->spec);
        j["n"] = n;
        j["bound_type"] = kBoundType;
        j["best"] = r.best;
        j["policies_enumerated"] = r.policies;
        j["breakdown"] = to_json(r.breakdown);
        j["witness"] = to_json(r.witness);
        emit(json, j);
    });
}

dsaht_status dsaht_lambda_sweep(const dsaht_problem* problem, int n, const double* lambdas, size_t count,
                                const dsaht_caps* caps, char** json, char** csv) {
    return guarded([&] {
        require(problem != nullptr && (lambdas != nullptr || count == 0), "null argument");
        std::vector<LambdaWeights> ws;
        for (size_t i = 0; i < count; ++i) ws.push_back({lambdas[3 * i], lambdas[3 * i + 1], lambdas[3 * i + 2]});
        const auto rows = lambda_sweep(problem->spec, problem->channel, n, ws, to_caps(caps));
        Json j;
        j["spec"] = to_json(problem->spec);
        j["n"] = n;
        j["bound_type"] = kBoundType;
        Json arr = Json::array();
        for (const auto& r : rows) {
            Json row;
            row["lambda"] = to_json(r.lambda);
            if (r.result) {
                row["In_lambda"] = r.result->best;
                row["I1"] = r.result->breakdown.i1;
                row["I2"] = r.result->breakdown.i2;
                row["I3"] = r.result->breakdown.i3;
                row["policies_enumerated"] = r.result->policies;
                row["root_action"] = to_json(r.result->witness.root().action);
            } else {
                row["error"] = r.error;
            }
            arr.push_back(std::move(row));
        }
        j["rows"] = std::move(arr);
        emit(json, j);
        if (csv) *csv = dup(sweep_csv(rows));
    });
}

dsaht_status dsaht_check_invariants(const dsaht_problem* problem, int horizon, const dsaht_caps* caps, uint64_t seed,
                                    char** json, int* passed) {
    return guarded([&] {
        require(problem != nullptr, "null handle");
        const auto c = to_caps(caps);
        const auto& spec = problem->spec;
        const auto& ch = problem->channel;
        constexpr double kTight = 1e-12;
        constexpr double kStage = 1e-10;

        std::vector<std::pair<std::string, PolicyTree>> policies;
        policies.emplace_back("dp_optimal", solve_dp(spec, ch, horizon, CostKind::ErrorProbability, c).policy);
        policies.emplace_back("constant_identity", constant_policy(spec, ch, horizon, identity_action(spec)));
        policies.emplace_back("seeded", seeded_policy(spec, ch, horizon, seed, c.max_nodes));

        Json j;
        j["spec"] = to_json(spec);
        j["horizon"] = horizon;
        bool ok = true;

        const auto bayes = check_policy_independence(spec, ch, horizon, std::nullopt, c.max_histories);
        Json b;
        b["max_deviation"] = bayes.max_deviation;
        b["histories"] = bayes.histories;
        b["tolerance"] = kTight;
        b["passed"] = bayes.max_deviation < kTight;
        ok = ok && bayes.max_deviation < kTight;
        j["belief_update_consistency"] = std::move(b);

        Json fact;
        double fact_max = 0.0;
        for (const auto& [name, p] : policies) {
            const auto r = check_factorization(p, ch, horizon, c.max_histories);
            fact_max = std::max(fact_max, r.max_deviation);
            fact[name] = deviation_entry(kTight, r);
        }
        fact["max_deviation"] = fact_max;
        fact["passed"] = fact_max < kTight;
        ok = ok && fact_max < kTight;
        j["input_factorization"] = std::move(fact);

        const LambdaWeights lambdas[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
        double stage_max = 0.0;
        double chain_max = 0.0;
        Json stage;
        for (const auto& [name, p] : policies) {
            double dev = 0.0;
            for (const auto& l : lambdas) {
                const auto a = evaluate_In(p, ch, horizon, l, c.max_nodes);
                const auto f = full_history_In(p, ch, horizon, l, c.max_histories);
                dev = std::max({dev, std::abs(a.i1 - f.i1), std::abs(a.i2 - f.i2), std::abs(a.i3 - f.i3),
                                std::abs(a.weighted - f.weighted)});
                for (std::size_t t = 0; t < a.i1_t.size(); ++t)
                    dev = std::max({dev, std::abs(a.i1_t[t] - f.i1_t[t]), std::abs(a.i2_t[t] - f.i2_t[t]),
                                    std::abs(a.i3_t[t] - f.i3_t[t])});
                chain_max = std::max(chain_max, std::abs(a.i3 - *f.message_information));
            }
            stage[name] = dev;
            stage_max = std::max(stage_max, dev);
        }
        stage["max_deviation"] = stage_max;
        stage["chain_rule_deviation"] = chain_max;
        stage["tolerance"] = kStage;
        stage["passed"] = stage_max < kStage && chain_max < kStage;
        ok = ok && stage_max < kStage && chain_max < kStage;
        j["stage_function_equivalence"] = std::move(stage);

        std::vector<PolicyTree> trees;
        for (const auto& entry : policies) trees.push_back(entry.second);
        const auto kernel = check_kernel_independence(trees, ch, horizon, c.max_histories);
        j["kernel_policy_independence"] = deviation_entry(kTight, kernel);
        ok = ok && kernel.passed;

        j["passed"] = ok;
        if (passed) *passed = ok ? 1 : 0;
        emit(json, j);
    });
}

}  // extern "C"
