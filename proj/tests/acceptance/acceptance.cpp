// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsaht/capacity.hpp"
#include "dsaht/channels.hpp"
#include "dsaht/dp.hpp"
#include "dsaht/info.hpp"
#include "dsaht/objectives.hpp"
#include "dsaht/unstructured.hpp"

using namespace dsaht;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

struct NamedChannel {
    std::string name;
    Channel ch;
};

const ProblemSpec kBinary{2, 2, 2, 2, 2, LogBase::Bits};

std::vector<NamedChannel> channels(const std::vector<std::string>& generators) {
    std::vector<NamedChannel> out;
    for (const auto& g : generators) out.push_back({g, make_channel(kBinary, g)});
    return out;
}

// XOR-BSC at three crossovers plus three seeded random channels.
std::vector<NamedChannel> core_set() {
    return channels({"xor-bsc(0.05)", "xor-bsc(0.1)", "xor-bsc(0.2)", "random(101)", "random(202)", "random(303)"});
}

std::vector<NamedChannel> battery() {
    return channels({"xor-bsc(0.1)", "random(101)", "random(202)", "random(303)", "random(404)"});
}

std::vector<std::pair<std::string, PolicyTree>> policies_for(const Channel& ch, int n) {
    std::vector<std::pair<std::string, PolicyTree>> p;
    p.emplace_back("dp", solve_dp(kBinary, ch, n).policy);
    p.emplace_back("identity", constant_policy(kBinary, ch, n, identity_action(kBinary)));
    p.emplace_back("seeded", seeded_policy(kBinary, ch, n, 7));
    return p;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

Outcome dp_matches_oracle() {
    nlohmann::json golden;
    std::ifstream(std::string(DSAHT_GOLDEN_DIR) + "/xor_bsc_0.1.json") >> golden;
    double worst = 0.0;
    bool exact_ok = true;
    bool golden_ok = true;
    for (const auto& [name, ch] : core_set())
        for (int n = 1; n <= 2; ++n) {
            const double dp = solve_dp(kBinary, ch, n).policy.root_value();
            const double bf = brute_force_unstructured<double>(kBinary, ch, n, Caps{}.max_strategies).min_error;
            worst = std::max(worst, std::abs(dp - bf));
            const auto exact_dp = exact_dp_value<Rational>(kBinary, ch, n);
            const auto exact_bf = brute_force_unstructured<Rational>(kBinary, ch, n, Caps{}.max_strategies).min_error;
            exact_ok = exact_ok && exact_dp == exact_bf;
            if (name == "xor-bsc(0.1)") {
                const auto& g = golden["n" + std::to_string(n)];
                golden_ok = golden_ok && exact_bf.str() == g["pe_star_rational"].get<std::string>() &&
                            std::abs(dp - g["pe_star"].get<double>()) < 1e-12;
            }
        }
    return {worst < 1e-12 && exact_ok && golden_ok,
            "max |dp - oracle| = " + fmt(worst) + ", rational equality " + (exact_ok ? "yes" : "no") +
                ", golden " + (golden_ok ? "matches" : "differs")};
}

Outcome update_is_policy_independent() {
    double worst = 0.0;
    std::size_t histories = 0;
    for (const auto& [name, ch] : core_set()) {
        const auto r = check_policy_independence(kBinary, ch, 4);
        worst = std::max(worst, r.max_deviation);
        histories += r.histories;
    }
    return {worst < 1e-12, "max deviation " + fmt(worst) + " over " + std::to_string(histories) + " histories"};
}

Outcome inputs_factorize() {
    double worst = 0.0;
    std::size_t cases = 0;
    for (const auto& [name, ch] : battery())
        for (int n = 1; n <= 3; ++n)
            for (const auto& [pname, p] : policies_for(ch, n)) {
                worst = std::max(worst, check_factorization(p, ch, n).max_deviation);
                ++cases;
            }
    return {worst < 1e-12, "max deviation " + fmt(worst) + " over " + std::to_string(cases) + " (channel, policy, n)"};
}

Outcome stage_functions_match_full_history() {
    const LambdaWeights lambdas[] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {1, 1, 1}};
    double worst = 0.0;
    for (const auto& [name, ch] : core_set())
        for (int n = 1; n <= 4; ++n)
            for (const auto& [pname, p] : policies_for(ch, n))
                for (const auto& l : lambdas) {
                    const auto a = evaluate_In(p, ch, n, l);
                    const auto f = full_history_In(p, ch, n, l);
                    worst = std::max({worst, std::abs(a.i1 - f.i1), std::abs(a.i2 - f.i2), std::abs(a.i3 - f.i3),
                                      std::abs(a.weighted - f.weighted)});
                    for (std::size_t t = 0; t < a.i1_t.size(); ++t)
                        worst = std::max({worst, std::abs(a.i1_t[t] - f.i1_t[t]), std::abs(a.i2_t[t] - f.i2_t[t]),
                                          std::abs(a.i3_t[t] - f.i3_t[t])});
                }
    return {worst < 1e-10, "max componentwise deviation " + fmt(worst)};
}

Outcome kernel_is_policy_independent() {
    double worst = 0.0;
    for (const auto& [name, ch] : battery())
        for (int n = 1; n <= 3; ++n) {
            std::vector<PolicyTree> trees;
            for (auto& [pname, p] : policies_for(ch, n)) trees.push_back(std::move(p));
            worst = std::max(worst, check_kernel_independence(trees, ch, n).max_deviation);
        }
    return {worst < 1e-12, "max deviation " + fmt(worst)};
}

Outcome costs_telescope() {
    const CostKind kinds[] = {CostKind::JointEntropyDrift, CostKind::ConditionalEntropyDriftUser1,
                              CostKind::ConditionalEntropyDriftUser2, CostKind::Ejs};
    double worst = 0.0;
    bool saturated = false;
    for (const auto& [name, ch] : core_set())
        for (int n = 1; n <= 4; ++n) {
            const auto policy = solve_dp(kBinary, ch, n).policy;
            for (auto k : kinds) {
                const auto r = check_telescoping(policy, ch, k);
                worst = std::max(worst, r.residual);
                saturated = saturated || r.saturated;
            }
        }
    return {worst < 1e-10 && !saturated,
            "max residual " + fmt(worst) + (saturated ? " (saturated KL encountered)" : "")};
}

Outcome closed_form_values() {
    std::vector<std::string> failures;
    auto expect = [&](bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    };

    const auto uniform = uniform_channel(kBinary);
    for (int n = 1; n <= 2; ++n) {
        const auto policy = solve_dp(kBinary, uniform, n).policy;
        expect(std::abs(policy.root_value() - 0.75) < 1e-12, "uniform Pe*");
        const auto d = evaluate_In(policy, uniform, n, {1, 1, 1});
        expect(std::abs(d.i1) < 1e-12 && std::abs(d.i2) < 1e-12 && std::abs(d.i3) < 1e-12, "uniform informations");
    }

    const ProblemSpec pair{2, 2, 4, 2, 2, LogBase::Bits};
    const auto identity = identity_pair_channel(pair);
    expect(std::abs(solve_dp(pair, identity, 1).policy.root_value()) < 1e-12, "identity-pair Pe*");
    const auto injective = constant_policy(pair, identity, 1, identity_action(pair));
    expect(std::abs(evaluate_In(injective, identity, 1, {0, 0, 1}).weighted - 2.0) < 1e-12, "identity-pair I");

    const auto xor01 = xor_bsc_channel(kBinary, 0.1);
    const auto one_shot = constant_policy(kBinary, xor01, 1, identity_action(kBinary));
    const double i3 = evaluate_In(one_shot, xor01, 1, {0, 0, 1}).weighted;
    expect(std::abs(i3 - 0.53100) <= 1e-4, "xor-bsc(0.1) I(X1,X2;Z) near 0.53100");
    expect(std::abs(i3 - (1.0 - binary_entropy(0.1))) < 1e-12, "xor-bsc(0.1) I(X1,X2;Z) closed form");

    std::string detail = "I(X1,X2;Z) on xor-bsc(0.1) = " + fmt(i3);
    for (const auto& f : failures) detail += "; failed: " + f;
    return {failures.empty(), detail};
}

Outcome monte_carlo_agrees() {
    const auto ch = xor_bsc_channel(kBinary, 0.1);
    const auto policy = solve_dp(kBinary, ch, 2).policy;
    const double exact = evaluate_policy_exact(policy, ch);
    const auto mc = simulate_monte_carlo(policy, ch, 1'000'000, 42);
    const double gap = std::abs(mc.estimate - exact);
    return {gap <= mc.half_width, "estimate " + fmt(mc.estimate) + " vs exact " + fmt(exact) + ", |gap| " +
                                      fmt(gap) + " <= half-width " + fmt(mc.half_width)};
}

Outcome fixed_points_are_sane() {
    std::vector<std::string> failures;
    const CostKind kinds[] = {CostKind::JointEntropyDrift, CostKind::ConditionalEntropyDriftUser1,
                              CostKind::ConditionalEntropyDriftUser2, CostKind::Ejs};
    const SimplexGrid grid(2, 2, 20);
    const auto uniform = uniform_channel(kBinary);
    FixedPointOptions avg;
    avg.mode = FixedPointMode::Average;
    for (auto k : kinds) {
        const auto r = fixed_point_solve(kBinary, uniform, k, grid, avg);
        const double vmax = std::abs(*std::max_element(r.value.begin(), r.value.end(),
                                                       [](double a, double b) { return std::abs(a) < std::abs(b); }));
        if (!(r.converged && r.residual < 1e-10 && std::abs(r.gain) < 1e-12 && vmax < 1e-12))
            failures.push_back("uniform " + to_string(k));
    }

    const ProblemSpec pair{2, 2, 4, 2, 2, LogBase::Bits};
    FixedPointOptions disc;
    disc.beta = 0.9;
    const auto r = fixed_point_solve(pair, identity_pair_channel(pair), CostKind::JointEntropyDrift, grid, disc);
    const double v = r.value[r.anchor];
    if (!(r.converged && std::abs(v + 2.0) <= 0.05)) failures.push_back("identity-pair discounted");

    std::string detail = "identity-pair V(uniform) = " + fmt(v) + " after " + std::to_string(r.iterations) + " sweeps";
    for (const auto& f : failures) detail += "; failed: " + f;
    return {failures.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"structured DP equals unstructured brute force", dp_matches_oracle},
        {"recursive belief equals direct posterior", update_is_policy_independent},
        {"induced inputs factorize across users", inputs_factorize},
        {"stage functions equal full-history informations", stage_functions_match_full_history},
        {"joint-state kernel is policy independent", kernel_is_policy_independent},
        {"instantaneous costs telescope", costs_telescope},
        {"closed-form spot values", closed_form_values},
        {"Monte Carlo within 95% CI of exact value", monte_carlo_agrees},
        {"fixed-point solver sanity", fixed_points_are_sane},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("criterion %zu: %s  %s: %s  [%.2f s]\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                    o.detail.c_str(), secs);
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
