#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>

#include "dsaht/dsaht.h"

namespace {

dsaht_spec binary(int z_size = 2) { return {2, 2, z_size, 2, 2, DSAHT_BITS}; }

std::string take(char* s) {
    std::string out = s ? s : "";
    dsaht_string_free(s);
    return out;
}

struct Fixture {
    dsaht_problem* problem = nullptr;
    dsaht_caps caps{};

    explicit Fixture(const char* generator, int z_size = 2) {
        const auto spec = binary(z_size);
        REQUIRE(dsaht_problem_create_generated(&spec, generator, &problem) == DSAHT_OK);
        dsaht_caps_default(&caps);
    }
    ~Fixture() { dsaht_problem_destroy(problem); }
};

}  // namespace

TEST_CASE("status strings and version") {
    CHECK(std::strlen(dsaht_version()) > 0);
    CHECK(std::string(dsaht_status_string(DSAHT_OK)) == "ok");
    CHECK(std::string(dsaht_status_string(DSAHT_BUDGET_EXCEEDED)) == "BudgetExceeded");
}

TEST_CASE("channel validation through the C API") {
    const auto spec = binary();
    const double bad[] = {0.5, 0.5, 0.8, 0.1, 0.9, 0.1, 0.5, 0.5};
    dsaht_problem* p = nullptr;
    CHECK(dsaht_problem_create(&spec, bad, 8, &p) == DSAHT_NOT_STOCHASTIC);
    CHECK(p == nullptr);
    CHECK(std::strlen(dsaht_last_error_message()) > 0);
    CHECK(dsaht_problem_create(&spec, bad, 4, &p) == DSAHT_DIMENSION_MISMATCH);
    CHECK(dsaht_problem_create(nullptr, bad, 8, &p) == DSAHT_INVALID_ARGUMENT);
    CHECK(dsaht_problem_create_generated(&spec, "no-such-channel", &p) == DSAHT_INVALID_ARGUMENT);

    Fixture f("uniform");
    char* json = nullptr;
    REQUIRE(dsaht_problem_describe(f.problem, &json) == DSAHT_OK);
    CHECK(take(json).find("\"stochastic\": true") != std::string::npos);
}

TEST_CASE("solve, serialize and evaluate a policy") {
    Fixture f("xor-bsc(0.1)");
    dsaht_policy* policy = nullptr;
    char* report = nullptr;
    REQUIRE(dsaht_solve_dp(f.problem, 2, "error_probability", &f.caps, 1, &policy, &report) == DSAHT_OK);
    CHECK(take(report).find("\"pe_star\"") != std::string::npos);

    double value = 0.0;
    REQUIRE(dsaht_policy_root_value(policy, &value) == DSAHT_OK);
    CHECK(value == doctest::Approx(0.19));
    int horizon = 0;
    REQUIRE(dsaht_policy_horizon(policy, &horizon) == DSAHT_OK);
    CHECK(horizon == 2);

    char* json = nullptr;
    REQUIRE(dsaht_policy_to_json(policy, &json) == DSAHT_OK);
    const auto text = take(json);
    dsaht_policy* back = nullptr;
    REQUIRE(dsaht_policy_from_json(text.c_str(), &back) == DSAHT_OK);
    double pe = 1.0;
    REQUIRE(dsaht_policy_evaluate(f.problem, back, &pe) == DSAHT_OK);
    CHECK(pe == value);

    double est1 = 0.0, hw1 = 0.0, est2 = 0.0, hw2 = 0.0;
    REQUIRE(dsaht_simulate(f.problem, policy, 20'000, 42, &est1, &hw1) == DSAHT_OK);
    REQUIRE(dsaht_simulate(f.problem, policy, 20'000, 42, &est2, &hw2) == DSAHT_OK);
    CHECK(est1 == est2);
    CHECK(std::abs(est1 - value) <= hw1);

    dsaht_policy_destroy(back);
    dsaht_policy_destroy(policy);
}

TEST_CASE("fixed policies and reports") {
    Fixture f("identity-pair", 4);
    const int e1[] = {0, 1};
    const int e2[] = {0, 1};
    dsaht_policy* policy = nullptr;
    REQUIRE(dsaht_policy_constant(f.problem, 1, e1, e2, &policy) == DSAHT_OK);
    double pe = 1.0;
    REQUIRE(dsaht_policy_evaluate(f.problem, policy, &pe) == DSAHT_OK);
    CHECK(pe == 0.0);

    const double lambda[] = {0, 0, 1};
    char* json = nullptr;
    REQUIRE(dsaht_capacity_eval(f.problem, policy, 1, lambda, 1, &f.caps, &json) == DSAHT_OK);
    const auto text = take(json);
    CHECK(text.find("\"In_lambda\": 2.0") != std::string::npos);
    CHECK(text.find("structured_deterministic_lower_bound") != std::string::npos);

    const int bad_e1[] = {0, 7};
    dsaht_policy* rejected = nullptr;
    CHECK(dsaht_policy_constant(f.problem, 1, bad_e1, e2, &rejected) == DSAHT_INVALID_ARGUMENT);

    const double none[] = {0, 0, 0};
    CHECK(dsaht_capacity_eval(f.problem, policy, 1, none, 0, &f.caps, &json) == DSAHT_INVALID_ARGUMENT);
    dsaht_policy_destroy(policy);
}

TEST_CASE("budget errors surface as statuses") {
    Fixture f("xor-bsc(0.1)");
    f.caps.max_strategies = 100;
    char* json = nullptr;
    CHECK(dsaht_oracle_unstructured(f.problem, 2, 0, f.caps.max_strategies, &json) == DSAHT_BUDGET_EXCEEDED);
    f.caps.max_nodes = 3;
    dsaht_policy* policy = nullptr;
    CHECK(dsaht_solve_dp(f.problem, 3, "error_probability", &f.caps, 0, &policy, nullptr) == DSAHT_BUDGET_EXCEEDED);
    CHECK(policy == nullptr);
}

TEST_CASE("fixed point, sweep and invariant checks") {
    Fixture f("uniform");
    dsaht_fixed_point_options o;
    dsaht_fixed_point_options_default(&o);
    o.resolution = 4;
    o.average = 1;
    char* json = nullptr;
    REQUIRE(dsaht_fixed_point(f.problem, "joint_entropy_drift", &o, &json) == DSAHT_OK);
    CHECK(take(json).find("\"gain\"") != std::string::npos);
    CHECK(dsaht_fixed_point(f.problem, "error_probability", &o, &json) == DSAHT_INVALID_ARGUMENT);

    const double lambdas[] = {1, 0, 0, 0, 1, 0};
    char* csv = nullptr;
    REQUIRE(dsaht_lambda_sweep(f.problem, 1, lambdas, 2, &f.caps, &json, &csv) == DSAHT_OK);
    take(json);
    const auto table = take(csv);
    CHECK(table.rfind("λ1,λ2,λ3,In_lambda,I1,I2,I3\n", 0) == 0);

    Fixture x("xor-bsc(0.1)");
    int passed = 0;
    REQUIRE(dsaht_check_invariants(x.problem, 2, &x.caps, 7, &json, &passed) == DSAHT_OK);
    take(json);
    CHECK(passed == 1);
}

TEST_CASE("null handles are rejected") {
    double v = 0.0;
    CHECK(dsaht_policy_root_value(nullptr, &v) == DSAHT_INVALID_ARGUMENT);
    char* json = nullptr;
    CHECK(dsaht_problem_describe(nullptr, &json) == DSAHT_INVALID_ARGUMENT);
    dsaht_problem_destroy(nullptr);
    dsaht_policy_destroy(nullptr);
    dsaht_string_free(nullptr);
}
