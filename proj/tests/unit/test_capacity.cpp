#include <doctest.h>

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "helpers.hpp"
#include "dsaht/capacity.hpp"
#include "dsaht/info.hpp"

using namespace dsaht;
using dsaht::test::action;
using dsaht::test::binary_spec;
using dsaht::test::code_of;

namespace {

const double kGap = 1.0 - binary_entropy(0.1);

Channel mixed_channel(const ProblemSpec& spec) {
    return validate_channel(spec, std::vector<double>{0.5, 0.5, 0.9, 0.1, 0.9, 0.1, 0.5, 0.5});
}

}  // namespace

TEST_CASE("h0 examples") {
    const auto spec = binary_spec();
    const auto pi = JointBelief::uniform(2, 2);
    const auto id = action({0, 1}, {0, 1});
    CHECK(h0(pi, id, identity_pair_channel(binary_spec(4))) == 0.0);
    const auto xor_ch = xor_bsc_channel(spec, 0.1);
    for (const auto& e : ActionSpace(spec).all())
        CHECK(h0(JointBelief::from_weights(2, 2, {0.1, 0.2, 0.3, 0.4}), e, xor_ch) ==
              doctest::Approx(binary_entropy(0.1)).epsilon(1e-14));

    std::ifstream in(std::string(DSAHT_GOLDEN_DIR) + "/stage_values.json");
    REQUIRE(in.good());
    const auto golden = nlohmann::json::parse(in)["mixed"]["h0"].get<double>();
    CHECK(h0(pi, id, mixed_channel(spec)) == doctest::Approx(golden).epsilon(1e-14));
}

TEST_CASE("h3 and h1 examples") {
    const auto pi = JointBelief::uniform(2, 2);
    const auto id = action({0, 1}, {0, 1});
    const auto spec = binary_spec();
    const auto u2 = PrivateBelief::uniform(User::Two, 2);
    const auto u1 = PrivateBelief::uniform(User::One, 2);

    CHECK(h3(pi, id, uniform_channel(spec)) == doctest::Approx(1.0));
    CHECK(h3(pi, id, identity_pair_channel(binary_spec(4))) == doctest::Approx(2.0));
    CHECK(h3(pi, id, xor_bsc_channel(spec, 0.1)) == doctest::Approx(1.0));

    CHECK(h1(u2, pi, id, uniform_channel(spec)) == doctest::Approx(1.0));
    CHECK(h1(u2, pi, id, identity_pair_channel(binary_spec(4))) == doctest::Approx(1.0));
    CHECK(h1(u2, pi, id, xor_bsc_channel(spec, 0.1)) == doctest::Approx(1.0));
    CHECK(h2(u1, pi, id, xor_bsc_channel(spec, 0.1)) == doctest::Approx(1.0));
}

TEST_CASE("stage rewards") {
    const auto spec = binary_spec();
    const auto state = JointState::initial(spec);
    const auto id = action({0, 1}, {0, 1});

    const auto u = stage_rewards(state, id, uniform_channel(spec));
    CHECK(std::abs(u.i1) < 1e-15);
    CHECK(std::abs(u.i2) < 1e-15);
    CHECK(std::abs(u.i3) < 1e-15);

    const auto r = stage_rewards(JointState::initial(binary_spec(4)), id, identity_pair_channel(binary_spec(4)));
    CHECK(r.i1 == doctest::Approx(1.0));
    CHECK(r.i2 == doctest::Approx(1.0));
    CHECK(r.i3 == doctest::Approx(2.0));

    const auto x = stage_rewards(state, id, xor_bsc_channel(spec, 0.1));
    CHECK(x.i1 == doctest::Approx(kGap));
    CHECK(x.i2 == doctest::Approx(kGap));
    CHECK(x.i3 == doctest::Approx(kGap));
}

TEST_CASE("joint kernel branches") {
    const auto spec = binary_spec();
    const auto state = JointState::initial(spec);
    const auto id = action({0, 1}, {0, 1});

    const auto xor_branches = joint_kernel_step(state, id, xor_bsc_channel(spec, 0.1));
    REQUIRE(xor_branches.size() == 8);
    double total = 0.0;
    for (const auto& b : xor_branches) {
        CHECK((std::abs(b.prob - 0.225) < 1e-15 || std::abs(b.prob - 0.025) < 1e-15));
        total += b.prob;
    }
    CHECK(std::abs(total - 1.0) < 1e-12);

    const auto merged = joint_kernel_step(state, id, uniform_channel(spec));
    REQUIRE(merged.size() == 4);
    for (const auto& b : merged) {
        CHECK(b.prob == doctest::Approx(0.25));
        CHECK(b.next.pi.key() == state.pi.key());
        CHECK(std::max(b.next.pihat1(0), b.next.pihat1(1)) == 1.0);
        CHECK(std::max(b.next.pihat2(0), b.next.pihat2(1)) == 1.0);
    }

    const auto id_spec = binary_spec(4);
    const auto single = joint_kernel_step(JointState::initial(id_spec), action({1, 1}, {0, 0}),
                                          identity_pair_channel(id_spec));
    REQUIRE(single.size() == 1);
    CHECK(single[0].prob == 1.0);
    CHECK(single[0].next.key() == JointState::initial(id_spec).key());
}

TEST_CASE("kernel probabilities sum to one on reachable states") {
    const auto spec = binary_spec();
    const auto ch = random_channel(spec, 61);
    std::vector<JointState> level{JointState::initial(spec)};
    for (int t = 0; t < 3; ++t) {
        std::vector<JointState> next;
        for (const auto& s : level) {
            for (const auto& e : {action({0, 1}, {1, 0}), action({0, 0}, {0, 1})}) {
                double total = 0.0;
                for (const auto& b : joint_kernel_step(s, e, ch)) {
                    total += b.prob;
                    if (next.size() < 64) next.push_back(b.next);
                }
                CHECK(std::abs(total - 1.0) < 1e-12);
            }
        }
        level = std::move(next);
    }
}

TEST_CASE("directed information of simple policies") {
    const auto spec = binary_spec();
    const LambdaWeights sum3{0, 0, 1};

    const auto uniform = uniform_channel(spec);
    const auto u = evaluate_In(solve_dp(spec, uniform, 2).policy, uniform, 2, {1, 1, 1});
    CHECK(std::abs(u.weighted) < 1e-15);

    const auto id_spec = binary_spec(4);
    const auto id = identity_pair_channel(id_spec);
    const auto id_policy = constant_policy(id_spec, id, 1, action({0, 1}, {0, 1}));
    const auto d = evaluate_In(id_policy, id, 1, sum3);
    CHECK(d.weighted == doctest::Approx(2.0));
    const auto oracle = full_history_In(id_policy, id, 1, sum3);
    CHECK(std::abs(oracle.weighted - d.weighted) < 1e-15);

    const auto xor_ch = xor_bsc_channel(spec, 0.1);
    const auto x = evaluate_In(constant_policy(spec, xor_ch, 1, action({0, 1}, {0, 1})), xor_ch, 1, sum3);
    CHECK(x.weighted == doctest::Approx(kGap));
    CHECK(x.weighted == doctest::Approx(0.53100).epsilon(1e-5));
}

TEST_CASE("stage functions agree with the full-history oracle") {
    const auto spec = binary_spec();
    const LambdaWeights all{1, 1, 1};
    for (const auto& ch : {xor_bsc_channel(spec, 0.1), random_channel(spec, 71)}) {
        for (const auto& policy : {solve_dp(spec, ch, 3).policy, seeded_policy(spec, ch, 3, 7)}) {
            const auto a = evaluate_In(policy, ch, 3, all);
            const auto b = full_history_In(policy, ch, 3, all);
            CHECK(std::abs(a.i1 - b.i1) < 1e-10);
            CHECK(std::abs(a.i2 - b.i2) < 1e-10);
            CHECK(std::abs(a.i3 - b.i3) < 1e-10);
            REQUIRE(b.message_information.has_value());
            CHECK(std::abs(a.i3 - *b.message_information) < 1e-10);
        }
    }
}

TEST_CASE("factorization and kernel independence checks") {
    const auto spec = binary_spec();
    const auto uniform = uniform_channel(spec);
    CHECK(check_factorization(seeded_policy(spec, uniform, 2, 1), uniform, 2).max_deviation == 0.0);

    const auto xor_ch = xor_bsc_channel(spec, 0.1);
    const auto dp = solve_dp(spec, xor_ch, 3).policy;
    const auto f = check_factorization(dp, xor_ch, 3);
    CHECK(f.passed);
    CHECK(f.max_deviation < 1e-12);

    const auto constant = constant_policy(spec, xor_ch, 2, action({0, 1}, {1, 0}));
    const auto k = check_kernel_independence({solve_dp(spec, xor_ch, 2).policy, constant}, xor_ch, 2);
    CHECK(k.passed);
    CHECK(k.max_deviation < 1e-12);

    const auto ku = check_kernel_independence(
        {constant_policy(spec, uniform, 2, action({0, 1}, {0, 1})), constant_policy(spec, uniform, 2, action({1, 0}, {0, 0}))},
        uniform, 2);
    CHECK(ku.max_deviation == 0.0);
}

TEST_CASE("structured policy search") {
    const auto spec = binary_spec();
    CHECK(search_Cn_lambda(spec, uniform_channel(spec), 1, {1, 1, 1}).best == doctest::Approx(0.0));

    const auto id_spec = binary_spec(4);
    const auto id = search_Cn_lambda(id_spec, identity_pair_channel(id_spec), 1, {0, 0, 1});
    CHECK(id.best == doctest::Approx(2.0));
    const auto root = id.witness.root().action;
    CHECK(root.e1(0) != root.e1(1));
    CHECK(root.e2(0) != root.e2(1));

    const auto xor_ch = xor_bsc_channel(spec, 0.1);
    const auto two = search_Cn_lambda(spec, xor_ch, 2, {0, 0, 1});
    CHECK(two.best >= kGap - 1e-12);

    Caps tight;
    tight.max_policies = 10;
    CHECK(code_of([&] { search_Cn_lambda(spec, xor_ch, 2, {0, 0, 1}, tight); }) == ErrorCode::BudgetExceeded);
    CHECK(code_of([&] { search_Cn_lambda(spec, xor_ch, 1, {0, 0, 0}); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("lambda sweep") {
    const auto spec = binary_spec();
    const std::vector<LambdaWeights> axes{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};

    for (const auto& row : lambda_sweep(spec, uniform_channel(spec), 1, axes)) {
        REQUIRE(row.result.has_value());
        CHECK(std::abs(row.result->best) < 1e-15);
    }

    const auto id_spec = binary_spec(4);
    const auto id_rows = lambda_sweep(id_spec, identity_pair_channel(id_spec), 1, axes);
    const std::vector<double> expected{1.0, 1.0, 2.0};
    for (std::size_t i = 0; i < 3; ++i) CHECK(id_rows[i].result->best == doctest::Approx(expected[i]));

    // On XOR-BSC every stage reward is 1 - H_b(0.1) under identity encoders, and
    // no action does better on any coordinate, so the value is that gap times sum(lambda).
    const std::vector<LambdaWeights> simplex{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {0.5, 0.5, 0}, {0.2, 0.3, 0.5}};
    const auto rows = lambda_sweep(spec, xor_bsc_channel(spec, 0.1), 1, simplex);
    for (std::size_t i = 0; i < simplex.size(); ++i) {
        REQUIRE(rows[i].result.has_value());
        const auto& l = simplex[i];
        CHECK(rows[i].result->best == doctest::Approx(kGap * (l.l1 + l.l2 + l.l3)).epsilon(1e-13));
    }

    Caps tight;
    tight.max_policies = 10;
    const auto failing = lambda_sweep(spec, xor_bsc_channel(spec, 0.1), 2, {{0, 0, 1}, {1, 0, 0}}, tight);
    REQUIRE(failing.size() == 2);
    CHECK_FALSE(failing[0].result.has_value());
    CHECK_FALSE(failing[0].error.empty());
}
