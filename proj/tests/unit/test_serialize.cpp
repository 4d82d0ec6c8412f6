#include <doctest.h>

#include <cmath>
#include <limits>

#include "helpers.hpp"
#include "dsaht/serialize.hpp"

using namespace dsaht;
using dsaht::test::binary_spec;

TEST_CASE("numbers are written with 17 significant digits") {
    Json j;
    j["a"] = 0.1;
    j["b"] = 2.0;
    j["c"] = std::numeric_limits<double>::quiet_NaN();
    j["d"] = 3;
    j["v"] = Json::array({0.5, 1.0});
    const auto text = dump_json(j);
    CHECK(text.find("\"a\": 0.10000000000000001") != std::string::npos);
    CHECK(text.find("\"b\": 2.0") != std::string::npos);
    CHECK(text.find("\"c\": null") != std::string::npos);
    CHECK(text.find("\"d\": 3,") != std::string::npos);
    CHECK(text.find("\"v\": [0.5, 1.0]") != std::string::npos);
    CHECK(text.back() == '\n');
    CHECK(Json::parse(text)["a"].get<double>() == 0.1);
}

TEST_CASE("problem spec round trip") {
    ProblemSpec spec{2, 3, 4, 2, 3, LogBase::Nats};
    const auto back = spec_from_json(Json::parse(dump_json(to_json(spec))));
    CHECK(back.x1_size == 2);
    CHECK(back.x2_size == 3);
    CHECK(back.z_size == 4);
    CHECK(back.m1 == 2);
    CHECK(back.m2 == 3);
    CHECK(back.log_base == LogBase::Nats);
}

TEST_CASE("policy tree round trip") {
    const auto spec = binary_spec();
    const auto ch = xor_bsc_channel(spec, 0.1);
    const auto policy = solve_dp(spec, ch, 2).policy;
    const auto text = dump_json(to_json(policy));
    const auto back = policy_from_json(Json::parse(text));
    CHECK(back.horizon() == 2);
    CHECK(back.nodes().size() == policy.nodes().size());
    CHECK(dump_json(to_json(back)) == text);
    CHECK(evaluate_policy_exact(back, ch) == evaluate_policy_exact(policy, ch));
}

TEST_CASE("malformed policy JSON is rejected") {
    CHECK_THROWS_AS(policy_from_json(Json::parse(R"({"horizon": 1})")), Error);
}

TEST_CASE("sweep CSV") {
    const auto spec = binary_spec();
    const auto rows = lambda_sweep(spec, uniform_channel(spec), 1, {{1, 0, 0}});
    const auto csv = sweep_csv(rows);
    CHECK(csv.rfind("λ1,λ2,λ3,In_lambda,I1,I2,I3\n", 0) == 0);
}
