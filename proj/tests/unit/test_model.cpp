#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "dsaht/info.hpp"

using namespace dsaht;
using dsaht::test::action;
using dsaht::test::binary_spec;
using dsaht::test::code_of;

namespace {

void check_values(std::span<const double> got, std::vector<double> want, double tol = 1e-15) {
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("belief update on XOR-BSC with identity encoders") {
    const auto spec = binary_spec();
    const auto ch = xor_bsc_channel(spec, 0.1);
    const auto post = belief_update(JointBelief::uniform(2, 2), action({0, 1}, {0, 1}), 0, ch);
    check_values(post.values(), {0.45, 0.05, 0.05, 0.45});
}

TEST_CASE("belief update leaves beliefs unchanged on the uniform channel") {
    const auto spec = binary_spec();
    const auto ch = uniform_channel(spec);
    const auto pi = JointBelief::from_weights(2, 2, {0.1, 0.2, 0.3, 0.4});
    for (const auto& e : ActionSpace(spec).all())
        for (int z = 0; z < 2; ++z) check_values(belief_update(pi, e, z, ch).values(), {0.1, 0.2, 0.3, 0.4}, 1e-12);
}

TEST_CASE("point mass is a fixed point of the belief update") {
    const auto spec = binary_spec();
    const auto ch = random_channel(spec, 5);
    const auto pi = JointBelief::point_mass(2, 2, 0, 0);
    const auto post = belief_update(pi, action({1, 0}, {0, 0}), 1, ch);
    check_values(post.values(), {1, 0, 0, 0});
}

TEST_CASE("belief update stays normalized on random beliefs") {
    const auto spec = binary_spec();
    const auto ch = random_channel(spec, 17);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const auto pi = JointBelief::from_weights(2, 2, {u(rng), u(rng), u(rng), u(rng)});
        for (const auto& e : ActionSpace(spec).all())
            for (int z = 0; z < 2; ++z) {
                const auto post = belief_update(pi, e, z, ch);
                double s = 0.0;
                for (double v : post.values()) s += v;
                CHECK(std::abs(s - 1.0) < 1e-12);
            }
    }
}

TEST_CASE("zero-probability observation is reported") {
    const auto spec = binary_spec(4);
    const auto ch = identity_pair_channel(spec);
    const auto pi = JointBelief::point_mass(2, 2, 0, 0);
    CHECK(code_of([&] { belief_update(pi, action({0, 1}, {0, 1}), 3, ch); }) ==
          ErrorCode::ZeroProbabilityObservation);
}

TEST_CASE("private belief update") {
    const PrivateBelief pihat(User::One, {0.2, 0.3, 0.5});
    const EncoderFunction e{User::One, {0, 0, 1}};
    check_values(private_belief_update(pihat, e, 0).values(), {0.4, 0.6, 0.0});

    const EncoderFunction injective{User::One, {1, 0, 2}};
    check_values(private_belief_update(pihat, injective, 0).values(), {0, 1, 0});

    const EncoderFunction constant{User::One, {1, 1, 1}};
    check_values(private_belief_update(pihat, constant, 1).values(), {0.2, 0.3, 0.5});

    const PrivateBelief point(User::One, {1.0, 0.0, 0.0});
    CHECK(code_of([&] { private_belief_update(point, e, 1); }) == ErrorCode::ZeroProbabilityInput);
}

TEST_CASE("induced input marginal") {
    const PrivateBelief pihat(User::One, {0.2, 0.3, 0.5});
    check_values(induced_input_marginal(pihat, EncoderFunction{User::One, {0, 0, 1}}, 2), {0.5, 0.5});

    const PrivateBelief two(User::Two, {0.3, 0.7});
    check_values(induced_input_marginal(two, EncoderFunction{User::Two, {0, 1}}, 2), {0.3, 0.7});
    check_values(induced_input_marginal(two, EncoderFunction{User::Two, {0, 0}}, 2), {1.0, 0.0});
}

TEST_CASE("ML decoding breaks ties toward the smallest pair") {
    CHECK(ml_decode(JointBelief::uniform(2, 2)) == MessagePair{0, 0});
    CHECK(ml_decode(JointBelief::point_mass(2, 2, 1, 0)) == MessagePair{1, 0});
    CHECK(ml_decode(JointBelief(2, 2, {0.45, 0.05, 0.05, 0.45})) == MessagePair{0, 0});
}

TEST_CASE("terminal cost") {
    CHECK(terminal_cost(JointBelief::uniform(2, 2)) == doctest::Approx(0.75));
    CHECK(terminal_cost(JointBelief::point_mass(2, 2, 1, 1)) == 0.0);
    CHECK(terminal_cost(JointBelief(2, 2, {0.45, 0.05, 0.05, 0.45})) == doctest::Approx(0.55));
}

TEST_CASE("channel validation") {
    const auto spec = binary_spec();
    CHECK(code_of([&] { validate_channel(spec, std::vector<double>{0.5, 0.5}); }) == ErrorCode::DimensionMismatch);
    CHECK(code_of([&] { validate_channel(spec, std::vector<double>{0.5, 0.5, 0.8, 0.1, 0.9, 0.1, 0.5, 0.5}); }) ==
          ErrorCode::NotStochastic);
    CHECK(code_of([&] { validate_channel(spec, std::vector<double>{1.5, -0.5, 1, 0, 1, 0, 1, 0}); }) ==
          ErrorCode::NegativeEntry);
    const auto ok = validate_channel(spec, std::vector<double>{0.5, 0.5, 0.9, 0.1, 0.9, 0.1, 0.5, 0.5});
    CHECK(ok(0, 1, 0) == 0.9);
}

TEST_CASE("action enumeration order") {
    const auto spec = binary_spec();
    const ActionSpace space(spec);
    REQUIRE(space.size() == 16);
    const auto first = space.action(0);
    CHECK(first.e1.map == std::vector<int>{0, 0});
    CHECK(first.e2.map == std::vector<int>{0, 0});
    const auto second = space.action(1);
    CHECK(second.e1.map == std::vector<int>{0, 0});
    CHECK(second.e2.map == std::vector<int>{0, 1});
    for (std::size_t i = 0; i < space.size(); ++i) CHECK(space.index(space.action(i)) == i);
}

TEST_CASE("problem spec rejects degenerate sizes") {
    CHECK(code_of([] { ProblemSpec{2, 2, 2, 1, 1, LogBase::Bits}.validate(); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { ProblemSpec{0, 2, 2, 2, 2, LogBase::Bits}.validate(); }) == ErrorCode::InvalidArgument);
}
