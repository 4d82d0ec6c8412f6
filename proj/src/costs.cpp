#include "dsaht/costs.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dsaht/info.hpp"

namespace dsaht {

std::string to_string(CostKind kind) {
    switch (kind) {
        case CostKind::ErrorProbability: return "error_probability";
        case CostKind::JointEntropyDrift: return "joint_entropy_drift";
        case CostKind::ConditionalEntropyDriftUser1: return "conditional_entropy_drift_user1";
        case CostKind::ConditionalEntropyDriftUser2: return "conditional_entropy_drift_user2";
        case CostKind::Ejs: return "ejs";
    }
    return "unknown";
}

CostKind parse_cost_kind(const std::string& text) {
    for (auto k : {CostKind::ErrorProbability, CostKind::JointEntropyDrift, CostKind::ConditionalEntropyDriftUser1,
                   CostKind::ConditionalEntropyDriftUser2, CostKind::Ejs})
        if (to_string(k) == text) return k;
    fail(ErrorCode::InvalidArgument, "unknown objective '" + text + "'");
}

double cost_joint_entropy(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base) {
    const auto pz = output_distribution(pi, e, ch);
    double c = 0.0;
    for (int w1 = 0; w1 < pi.m1(); ++w1)
        for (int w2 = 0; w2 < pi.m2(); ++w2) {
            const double p = pi(w1, w2);
            if (p == 0.0) continue;
            for (int z = 0; z < ch.z_size(); ++z) {
                const double q = pair_likelihood(ch, e, w1, w2, z);
                if (q < kLogFloor) continue;
                c -= q * p * log_in(q / pz[static_cast<std::size_t>(z)], base);
            }
        }
    return std::min(c, 0.0);
}

double cost_conditional_entropy(const JointBelief& pi, const JointAction& e, const Channel& ch, User user,
                                LogBase base) {
    // "own" is the message being resolved, "other" the one conditioned on.
    const bool first = user == User::One;
    const int m_own = first ? pi.m1() : pi.m2();
    const int m_other = first ? pi.m2() : pi.m1();
    auto joint = [&](int own, int other) { return first ? pi(own, other) : pi(other, own); };
    auto lik = [&](int own, int other, int z) {
        return first ? pair_likelihood(ch, e, own, other, z) : pair_likelihood(ch, e, other, own, z);
    };

    double c = 0.0;
    for (int other = 0; other < m_other; ++other) {
        double marginal = 0.0;
        for (int own = 0; own < m_own; ++own) marginal += joint(own, other);
        if (marginal <= 0.0) continue;
        for (int z = 0; z < ch.z_size(); ++z) {
            double mix = 0.0;
            for (int own = 0; own < m_own; ++own) mix += lik(own, other, z) * joint(own, other) / marginal;
            for (int own = 0; own < m_own; ++own) {
                const double p = joint(own, other);
                const double q = lik(own, other, z);
                if (p == 0.0 || q < kLogFloor) continue;
                c -= q * p * log_in(q / mix, base);
            }
        }
    }
    return std::min(c, 0.0);
}

CostValue cost_ejs(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base) {
    CostValue out;
    const int z_size = ch.z_size();
    std::vector<double> mix(static_cast<std::size_t>(z_size));
    for (int w1 = 0; w1 < pi.m1(); ++w1)
        for (int w2 = 0; w2 < pi.m2(); ++w2) {
            const double p = pi(w1, w2);
            const double rest = 1.0 - p;
            if (p == 0.0 || rest < 1e-12) continue;
            std::fill(mix.begin(), mix.end(), 0.0);
            for (int v1 = 0; v1 < pi.m1(); ++v1)
                for (int v2 = 0; v2 < pi.m2(); ++v2) {
                    if (v1 == w1 && v2 == w2) continue;
                    const double weight = pi(v1, v2) / rest;
                    if (weight == 0.0) continue;
                    const auto row = ch.row(e.e1(v1), e.e2(v2));
                    for (int z = 0; z < z_size; ++z) mix[static_cast<std::size_t>(z)] += weight * row[static_cast<std::size_t>(z)];
                }
            double kl = 0.0;
            bool mismatch = false;
            for (int z = 0; z < z_size; ++z) {
                const double q = pair_likelihood(ch, e, w1, w2, z);
                if (q < kLogFloor) continue;
                const double m = mix[static_cast<std::size_t>(z)];
                if (m < kLogFloor) {
                    mismatch = true;
                    break;
                }
                kl += q * log_in(q / m, base);
            }
            if (mismatch || kl > kKlSaturation) {
                kl = kKlSaturation;
                out.saturated = true;
            }
            out.value -= p * std::max(kl, 0.0);
        }
    return out;
}

CostValue instantaneous_cost(CostKind kind, const JointBelief& pi, const JointAction& e, const Channel& ch,
                             LogBase base) {
    switch (kind) {
        case CostKind::ErrorProbability: return {};
        case CostKind::JointEntropyDrift: return {cost_joint_entropy(pi, e, ch, base)};
        case CostKind::ConditionalEntropyDriftUser1: return {cost_conditional_entropy(pi, e, ch, User::One, base)};
        case CostKind::ConditionalEntropyDriftUser2: return {cost_conditional_entropy(pi, e, ch, User::Two, base)};
        case CostKind::Ejs: return cost_ejs(pi, e, ch, base);
    }
    return {};
}

CostValue terminal_functional(CostKind kind, const JointBelief& pi, LogBase base) {
    CostValue out;
    switch (kind) {
        case CostKind::ErrorProbability: out.value = terminal_cost(pi); break;
        case CostKind::JointEntropyDrift: out.value = entropy(pi.values(), base); break;
        case CostKind::ConditionalEntropyDriftUser1:
        case CostKind::ConditionalEntropyDriftUser2: {
            const bool first = kind == CostKind::ConditionalEntropyDriftUser1;
            double h = entropy(pi.values(), base);
            const int m_other = first ? pi.m2() : pi.m1();
            for (int other = 0; other < m_other; ++other)
                h -= neg_plogp(first ? pi.marginal2(other) : pi.marginal1(other), base);
            out.value = h;
            break;
        }
        case CostKind::Ejs:
            for (double p : pi.values()) {
                if (p == 0.0) continue;
                const double rest = 1.0 - p;
                if (rest < kLogFloor) {
                    out.value -= p * kKlSaturation;
                    out.saturated = true;
                    continue;
                }
                out.value -= p * log_in(p / rest, base);
            }
            break;
    }
    return out;
}

double initial_term(CostKind kind, const ProblemSpec& spec) {
    const auto prior = JointBelief::uniform(spec.m1, spec.m2);
    return terminal_functional(kind, prior, spec.log_base).value;
}

}  // namespace dsaht
