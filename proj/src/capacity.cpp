#include "dsaht/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "dsaht/info.hpp"

namespace dsaht {

void LambdaWeights::validate() const {
    if (!(l1 >= 0.0 && l2 >= 0.0 && l3 >= 0.0)) fail(ErrorCode::InvalidArgument, "lambda weights must be non-negative");
    if (l1 == 0.0 && l2 == 0.0 && l3 == 0.0) fail(ErrorCode::InvalidArgument, "lambda weights must not all be zero");
}

JointState JointState::initial(const ProblemSpec& spec) {
    return {PrivateBelief::uniform(User::One, spec.m1), PrivateBelief::uniform(User::Two, spec.m2),
            JointBelief::uniform(spec.m1, spec.m2)};
}

BeliefKey JointState::key() const {
    BeliefKey k = pihat1.key();
    k.push_back(-1);
    const auto k2 = pihat2.key();
    k.insert(k.end(), k2.begin(), k2.end());
    k.push_back(-1);
    const auto k3 = pi.key();
    k.insert(k.end(), k3.begin(), k3.end());
    return k;
}

double h0(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base) {
    const auto px = input_pair_distribution(pi, e, ch);
    double h = 0.0;
    for (int x1 = 0; x1 < ch.x1_size(); ++x1)
        for (int x2 = 0; x2 < ch.x2_size(); ++x2) {
            const double p = px[static_cast<std::size_t>(x1 * ch.x2_size() + x2)];
            if (p == 0.0) continue;
            h += p * entropy(ch.row(x1, x2), base);
        }
    return h;
}

double h3(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base) {
    const auto px = input_pair_distribution(pi, e, ch);
    std::vector<double> pz(static_cast<std::size_t>(ch.z_size()), 0.0);
    for (int x1 = 0; x1 < ch.x1_size(); ++x1)
        for (int x2 = 0; x2 < ch.x2_size(); ++x2) {
            const double p = px[static_cast<std::size_t>(x1 * ch.x2_size() + x2)];
            for (int z = 0; z < ch.z_size(); ++z) pz[static_cast<std::size_t>(z)] += ch(x1, x2, z) * p;
        }
    return entropy(pz, base);
}

namespace {

/// Shared body of h1 and h2. `known` is the user whose current input is
/// conditioned on; the other user's input is averaged out through
/// pi(w_other | w_known) weighted by the known user's private belief.
double conditional_output_entropy(User known, const PrivateBelief& pihat_known, const JointBelief& pi,
                                  const JointAction& e, const Channel& ch, LogBase base) {
    const bool known_is_2 = known == User::Two;
    const int m_known = known_is_2 ? pi.m2() : pi.m1();
    const int m_other = known_is_2 ? pi.m1() : pi.m2();
    const int x_known_size = known_is_2 ? ch.x2_size() : ch.x1_size();
    const int x_other_size = known_is_2 ? ch.x1_size() : ch.x2_size();
    const auto& e_known = known_is_2 ? e.e2 : e.e1;
    const auto& e_other = known_is_2 ? e.e1 : e.e2;
    auto joint = [&](int w_other, int w_known) { return known_is_2 ? pi(w_other, w_known) : pi(w_known, w_other); };
    auto q = [&](int x_other, int x_known, int z) { return known_is_2 ? ch(x_other, x_known, z) : ch(x_known, x_other, z); };

    const auto p_known = induced_input_marginal(pihat_known, e_known, x_known_size);

    // weight[x_known][x_other] = sum_w 1{..} pi(w_other | w_known) pihat(w_known)
    std::vector<double> weight(static_cast<std::size_t>(x_known_size * x_other_size), 0.0);
    for (int wk = 0; wk < m_known; ++wk) {
        const double ph = pihat_known(wk);
        if (ph == 0.0) continue;
        double marginal = 0.0;
        for (int wo = 0; wo < m_other; ++wo) marginal += joint(wo, wk);
        if (marginal <= 0.0) continue;
        for (int wo = 0; wo < m_other; ++wo)
            weight[static_cast<std::size_t>(e_known(wk) * x_other_size + e_other(wo))] += joint(wo, wk) / marginal * ph;
    }

    double h = 0.0;
    std::vector<double> pz(static_cast<std::size_t>(ch.z_size()));
    for (int xk = 0; xk < x_known_size; ++xk) {
        const double px = p_known[static_cast<std::size_t>(xk)];
        double norm = 0.0;
        for (int xo = 0; xo < x_other_size; ++xo) norm += weight[static_cast<std::size_t>(xk * x_other_size + xo)];
        if (px == 0.0 || norm <= 0.0) continue;
        std::fill(pz.begin(), pz.end(), 0.0);
        for (int xo = 0; xo < x_other_size; ++xo) {
            const double cond = weight[static_cast<std::size_t>(xk * x_other_size + xo)] / norm;
            if (cond == 0.0) continue;
            for (int z = 0; z < ch.z_size(); ++z) pz[static_cast<std::size_t>(z)] += q(xo, xk, z) * cond;
        }
        h += px * entropy(pz, base);
    }
    return h;
}

}  // namespace

double h1(const PrivateBelief& pihat2, const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base) {
    return conditional_output_entropy(User::Two, pihat2, pi, e, ch, base);
}

double h2(const PrivateBelief& pihat1, const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base) {
    return conditional_output_entropy(User::One, pihat1, pi, e, ch, base);
}

StageRewards stage_rewards(const JointState& state, const JointAction& e, const Channel& ch, LogBase base) {
    const double base_entropy = h0(state.pi, e, ch, base);
    return {h1(state.pihat2, state.pi, e, ch, base) - base_entropy, h2(state.pihat1, state.pi, e, ch, base) - base_entropy,
            h3(state.pi, e, ch, base) - base_entropy};
}

std::vector<KernelBranch> joint_kernel_step(const JointState& state, const JointAction& e, const Channel& ch) {
    const auto p1 = induced_input_marginal(state.pihat1, e.e1, ch.x1_size());
    const auto p2 = induced_input_marginal(state.pihat2, e.e2, ch.x2_size());
    std::vector<KernelBranch> out;
    std::unordered_map<BeliefKey, std::size_t, BeliefKeyHash> seen;
    for (int x1 = 0; x1 < ch.x1_size(); ++x1) {
        const double a = p1[static_cast<std::size_t>(x1)];
        if (a == 0.0) continue;
        const auto next1 = private_belief_update(state.pihat1, e.e1, x1);
        for (int x2 = 0; x2 < ch.x2_size(); ++x2) {
            const double b = p2[static_cast<std::size_t>(x2)];
            if (b == 0.0) continue;
            const auto next2 = private_belief_update(state.pihat2, e.e2, x2);
            for (int z = 0; z < ch.z_size(); ++z) {
                const double p = ch(x1, x2, z) * a * b;
                if (p <= kPruneThreshold) continue;
                JointState next{next1, next2, belief_update(state.pi, e, z, ch)};
                auto [it, inserted] = seen.try_emplace(next.key(), out.size());
                if (inserted)
                    out.push_back({p, std::move(next)});
                else
                    out[it->second].prob += p;
            }
        }
    }
    return out;
}

namespace {

void check_stages(const PolicyTree& policy, int n) {
    if (n < 1 || n > policy.horizon())
        fail(ErrorCode::InvalidArgument, "stage count must lie in [1, policy horizon]");
}

void clip_expectations(DirectedInfoBreakdown& d) {
    for (auto* v : {&d.i1_t, &d.i2_t, &d.i3_t})
        for (double& x : *v) {
            if (x < -1e-6)
                fail(ErrorCode::NegativeInformation, "stage information " + std::to_string(x) +
                                                         " is negative; the joint-state law is inconsistent");
            if (x < 0.0) {
                d.clipped = d.clipped || x < -1e-12;
                x = 0.0;
            }
        }
}

void finish_breakdown(DirectedInfoBreakdown& d, int n, const LambdaWeights& lambda) {
    auto avg = [n](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / n;
    };
    d.i1 = avg(d.i1_t);
    d.i2 = avg(d.i2_t);
    d.i3 = avg(d.i3_t);
    d.lambda = lambda;
    d.weighted = lambda.l1 * d.i1 + lambda.l2 * d.i2 + lambda.l3 * d.i3;
}

}  // namespace

DirectedInfoBreakdown evaluate_In(const PolicyTree& policy, const Channel& ch, int n, const LambdaWeights& lambda,
                                  std::size_t max_states) {
    lambda.validate();
    check_stages(policy, n);
    const auto& spec = policy.spec();
    DirectedInfoBreakdown d;
    d.i1_t.assign(static_cast<std::size_t>(n), 0.0);
    d.i2_t.assign(static_cast<std::size_t>(n), 0.0);
    d.i3_t.assign(static_cast<std::size_t>(n), 0.0);

    std::vector<std::pair<JointState, double>> level{{JointState::initial(spec), 1.0}};
    d.states = 1;
    for (int t = 0; t < n; ++t) {
        std::vector<std::pair<JointState, double>> next_level;
        std::unordered_map<BeliefKey, std::size_t, BeliefKeyHash> seen;
        for (const auto& [state, prob] : level) {
            const auto& node = policy.node_at(t, state.pi);
            const auto r = stage_rewards(state, node.action, ch, spec.log_base);
            d.i1_t[static_cast<std::size_t>(t)] += prob * r.i1;
            d.i2_t[static_cast<std::size_t>(t)] += prob * r.i2;
            d.i3_t[static_cast<std::size_t>(t)] += prob * r.i3;
            if (t + 1 == n) continue;
            for (auto& branch : joint_kernel_step(state, node.action, ch)) {
                auto [it, inserted] = seen.try_emplace(branch.next.key(), next_level.size());
                if (inserted) {
                    if (++d.states > max_states)
                        fail(ErrorCode::BudgetExceeded, "joint-state tree exceeds the cap of " +
                                                            std::to_string(max_states));
                    next_level.emplace_back(std::move(branch.next), prob * branch.prob);
                } else {
                    next_level[it->second].second += prob * branch.prob;
                }
            }
        }
        level = std::move(next_level);
    }
    clip_expectations(d);
    finish_breakdown(d, n, lambda);
    return d;
}

namespace {

/// One message pair and output sequence together with the inputs and policy
/// nodes it induces.
struct HistoryRecord {
    int w1 = 0;
    int w2 = 0;
    std::vector<int> x1, x2, z;
    std::vector<NodeId> node;
    double p = 0.0;
};

class HistoryEnumerator {
public:
    HistoryEnumerator(const PolicyTree& policy, const Channel& ch, int n) : policy_(policy), ch_(ch), n_(n) {}

    std::vector<HistoryRecord> run() {
        const auto& spec = policy_.spec();
        const double prior = 1.0 / spec.pairs();
        for (int w1 = 0; w1 < spec.m1; ++w1)
            for (int w2 = 0; w2 < spec.m2; ++w2) {
                HistoryRecord cur;
                cur.w1 = w1;
                cur.w2 = w2;
                cur.x1.resize(static_cast<std::size_t>(n_));
                cur.x2.resize(static_cast<std::size_t>(n_));
                cur.z.resize(static_cast<std::size_t>(n_));
                cur.node.resize(static_cast<std::size_t>(n_));
                walk(cur, 0, 0, prior);
            }
        return std::move(out_);
    }

private:
    void walk(HistoryRecord& cur, NodeId id, int depth, double p) {
        if (depth == n_) {
            cur.p = p;
            out_.push_back(cur);
            return;
        }
        const auto& node = policy_.nodes()[id];
        if (!node.action_index) fail(ErrorCode::IncompletePolicy, "policy node without an action");
        const int x1 = node.action.e1(cur.w1);
        const int x2 = node.action.e2(cur.w2);
        const auto d = static_cast<std::size_t>(depth);
        cur.x1[d] = x1;
        cur.x2[d] = x2;
        cur.node[d] = id;
        for (int z = 0; z < ch_.z_size(); ++z) {
            const double q = ch_(x1, x2, z);
            if (q == 0.0) continue;
            const auto it = std::find_if(node.children.begin(), node.children.end(),
                                         [z](const Branch& b) { return b.z == z; });
            if (it == node.children.end()) {
                if (p * q <= kPruneThreshold) continue;
                fail(ErrorCode::IncompletePolicy, "policy lacks a branch for a positive-probability output");
            }
            cur.z[d] = z;
            walk(cur, it->child, depth + 1, p * q);
        }
    }

    const PolicyTree& policy_;
    const Channel& ch_;
    int n_;
    std::vector<HistoryRecord> out_;
};

std::vector<HistoryRecord> enumerate_histories(const PolicyTree& policy, const Channel& ch, int n,
                                               std::size_t max_histories) {
    const auto& spec = policy.spec();
    double bound = spec.pairs();
    for (int t = 0; t < n; ++t) bound *= ch.z_size();
    if (bound > static_cast<double>(max_histories))
        fail(ErrorCode::BudgetExceeded, "full-history enumeration exceeds the cap of " + std::to_string(max_histories));
    return HistoryEnumerator(policy, ch, n).run();
}

/// Which coordinates of a record make up a marginalization key.
struct Fields {
    bool messages = false;
    int x1_len = 0;  ///< leading inputs of user 1
    int x2_len = 0;
    int z_len = 0;   ///< leading outputs
    int x1_at = -1;  ///< single extra coordinate, -1 for none
    int x2_at = -1;
    int z_at = -1;
};

BeliefKey make_key(const HistoryRecord& r, const Fields& f) {
    BeliefKey k;
    if (f.messages) {
        k.push_back(r.w1);
        k.push_back(r.w2);
    }
    k.push_back(-1);
    for (int t = 0; t < f.x1_len; ++t) k.push_back(r.x1[static_cast<std::size_t>(t)]);
    k.push_back(-2);
    for (int t = 0; t < f.x2_len; ++t) k.push_back(r.x2[static_cast<std::size_t>(t)]);
    k.push_back(-3);
    for (int t = 0; t < f.z_len; ++t) k.push_back(r.z[static_cast<std::size_t>(t)]);
    k.push_back(-4);
    k.push_back(f.x1_at < 0 ? -5 : r.x1[static_cast<std::size_t>(f.x1_at)]);
    k.push_back(f.x2_at < 0 ? -5 : r.x2[static_cast<std::size_t>(f.x2_at)]);
    k.push_back(f.z_at < 0 ? -5 : r.z[static_cast<std::size_t>(f.z_at)]);
    return k;
}

double marginal_entropy(const std::vector<HistoryRecord>& records, const Fields& f, LogBase base) {
    std::unordered_map<BeliefKey, double, BeliefKeyHash> mass;
    for (const auto& r : records) mass[make_key(r, f)] += r.p;
    double h = 0.0;
    for (const auto& [k, p] : mass) h += neg_plogp(p, base);
    return h;
}

/// I(A; B | C) = H(A,C) + H(B,C) - H(A,B,C) - H(C).
double conditional_mi(const std::vector<HistoryRecord>& records, const Fields& a, const Fields& b,
                      const Fields& c, LogBase base) {
    auto merge = [](Fields x, const Fields& y) {
        x.messages = x.messages || y.messages;
        x.x1_len = std::max(x.x1_len, y.x1_len);
        x.x2_len = std::max(x.x2_len, y.x2_len);
        x.z_len = std::max(x.z_len, y.z_len);
        if (y.x1_at >= 0) x.x1_at = y.x1_at;
        if (y.x2_at >= 0) x.x2_at = y.x2_at;
        if (y.z_at >= 0) x.z_at = y.z_at;
        return x;
    };
    const auto ac = merge(a, c);
    const auto bc = merge(b, c);
    const auto abc = merge(ac, b);
    return marginal_entropy(records, ac, base) + marginal_entropy(records, bc, base) -
           marginal_entropy(records, abc, base) - marginal_entropy(records, c, base);
}

}  // namespace

DirectedInfoBreakdown full_history_In(const PolicyTree& policy, const Channel& ch, int n,
                                      const LambdaWeights& lambda, std::size_t max_histories) {
    lambda.validate();
    check_stages(policy, n);
    const auto base = policy.spec().log_base;
    const auto records = enumerate_histories(policy, ch, n, max_histories);
    DirectedInfoBreakdown d;
    d.states = records.size();
    for (int t = 0; t < n; ++t) {
        Fields x1_now;
        x1_now.x1_at = t;
        Fields x2_now;
        x2_now.x2_at = t;
        Fields both_now;
        both_now.x1_at = t;
        both_now.x2_at = t;
        Fields z_now;
        z_now.z_at = t;
        // I(X1_t; Z_t | X2_{1:t}, Z_{1:t-1})
        Fields c1;
        c1.x2_len = t + 1;
        c1.z_len = t;
        d.i1_t.push_back(conditional_mi(records, x1_now, z_now, c1, base));
        // I(X2_t; Z_t | X1_{1:t}, Z_{1:t-1})
        Fields c2;
        c2.x1_len = t + 1;
        c2.z_len = t;
        d.i2_t.push_back(conditional_mi(records, x2_now, z_now, c2, base));
        // I(X1_t, X2_t; Z_t | Z_{1:t-1})
        Fields c3;
        c3.z_len = t;
        d.i3_t.push_back(conditional_mi(records, both_now, z_now, c3, base));
    }
    Fields messages;
    messages.messages = true;
    Fields outputs;
    outputs.z_len = n;
    d.message_information = conditional_mi(records, messages, outputs, Fields{}, base) / n;
    finish_breakdown(d, n, lambda);
    return d;
}

DeviationReport check_factorization(const PolicyTree& policy, const Channel& ch, int n, std::size_t max_histories) {
    check_stages(policy, n);
    const auto& spec = policy.spec();
    const auto records = enumerate_histories(policy, ch, n, max_histories);
    const int X1 = ch.x1_size();
    const int X2 = ch.x2_size();
    DeviationReport rep;

    struct Tally {
        std::vector<double> mass;
        double total = 0.0;
        std::size_t rep = 0;
    };
    using TallyMap = std::unordered_map<BeliefKey, Tally, BeliefKeyHash>;

    for (int t = 0; t < n; ++t) {
        const auto ts = static_cast<std::size_t>(t);
        TallyMap joint, user1, user2;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            auto add = [&](TallyMap& m, const Fields& f, std::size_t size, std::size_t slot) {
                auto& tally = m[make_key(r, f)];
                if (tally.mass.empty()) {
                    tally.mass.assign(size, 0.0);
                    tally.rep = i;
                }
                tally.mass[slot] += r.p;
                tally.total += r.p;
            };
            add(joint, Fields{false, t, t, t}, static_cast<std::size_t>(X1 * X2),
                static_cast<std::size_t>(r.x1[ts] * X2 + r.x2[ts]));
            add(user1, Fields{false, t, 0, t}, static_cast<std::size_t>(X1), static_cast<std::size_t>(r.x1[ts]));
            add(user2, Fields{false, 0, t, t}, static_cast<std::size_t>(X2), static_cast<std::size_t>(r.x2[ts]));
        }

        // pihat_{t-1} for a record's user-i history by composing the private update
        auto private_belief = [&](const HistoryRecord& r, User u) {
            auto pihat = PrivateBelief::uniform(u, spec.messages(u));
            for (int tau = 0; tau < t; ++tau) {
                const auto& node = policy.nodes()[r.node[static_cast<std::size_t>(tau)]];
                const auto& e = u == User::One ? node.action.e1 : node.action.e2;
                const int x = u == User::One ? r.x1[static_cast<std::size_t>(tau)] : r.x2[static_cast<std::size_t>(tau)];
                pihat = private_belief_update(pihat, e, x);
            }
            return pihat;
        };

        for (const auto& [key, tally] : joint) {
            if (tally.total <= 0.0) continue;
            ++rep.histories;
            const auto& r = records[tally.rep];
            const auto& m1 = user1.at(make_key(r, Fields{false, t, 0, t}));
            const auto& m2 = user2.at(make_key(r, Fields{false, 0, t, t}));
            for (int x1 = 0; x1 < X1; ++x1)
                for (int x2 = 0; x2 < X2; ++x2) {
                    const double pj = tally.mass[static_cast<std::size_t>(x1 * X2 + x2)] / tally.total;
                    const double pp = m1.mass[static_cast<std::size_t>(x1)] / m1.total *
                                      m2.mass[static_cast<std::size_t>(x2)] / m2.total;
                    rep.max_deviation = std::max(rep.max_deviation, std::abs(pj - pp));
                }
        }
        for (auto* m : {&user1, &user2}) {
            const User u = m == &user1 ? User::One : User::Two;
            const int X = u == User::One ? X1 : X2;
            for (const auto& [key, tally] : *m) {
                if (tally.total <= 0.0) continue;
                const auto& r = records[tally.rep];
                const auto& node = policy.nodes()[r.node[ts]];
                const auto& e = u == User::One ? node.action.e1 : node.action.e2;
                const auto closed = induced_input_marginal(private_belief(r, u), e, X);
                for (int x = 0; x < X; ++x)
                    rep.max_deviation = std::max(
                        rep.max_deviation,
                        std::abs(tally.mass[static_cast<std::size_t>(x)] / tally.total - closed[static_cast<std::size_t>(x)]));
            }
        }
    }
    rep.passed = rep.max_deviation < 1e-12;
    return rep;
}

namespace {

/// Posteriors computed directly from the full joint, for all histories of one
/// prefix length.
struct PrefixPosteriors {
    std::unordered_map<BeliefKey, std::vector<double>, BeliefKeyHash> common;  // z-prefix -> P(w, .)
    std::unordered_map<BeliefKey, std::vector<double>, BeliefKeyHash> own1;    // (x1, z)-prefix -> P(w1, .)
    std::unordered_map<BeliefKey, std::vector<double>, BeliefKeyHash> own2;
    std::unordered_map<BeliefKey, std::pair<double, std::size_t>, BeliefKeyHash> full;  // mass, representative

    static PrefixPosteriors build(const std::vector<HistoryRecord>& records, int len, const ProblemSpec& spec) {
        PrefixPosteriors pp;
        for (std::size_t i = 0; i < records.size(); ++i) {
            const auto& r = records[i];
            auto& c = pp.common[make_key(r, Fields{false, 0, 0, len})];
            c.resize(static_cast<std::size_t>(spec.pairs()), 0.0);
            c[static_cast<std::size_t>(r.w1 * spec.m2 + r.w2)] += r.p;
            auto& a = pp.own1[make_key(r, Fields{false, len, 0, len})];
            a.resize(static_cast<std::size_t>(spec.m1), 0.0);
            a[static_cast<std::size_t>(r.w1)] += r.p;
            auto& b = pp.own2[make_key(r, Fields{false, 0, len, len})];
            b.resize(static_cast<std::size_t>(spec.m2), 0.0);
            b[static_cast<std::size_t>(r.w2)] += r.p;
            auto [it, inserted] = pp.full.try_emplace(make_key(r, Fields{false, len, len, len}), 0.0, i);
            it->second.first += r.p;
        }
        return pp;
    }

    JointState state_of(const HistoryRecord& r, int len, const ProblemSpec& spec) const {
        auto normalized = [](std::vector<double> v) {
            double s = 0.0;
            for (double x : v) s += x;
            for (double& x : v) x /= s;
            return v;
        };
        return {PrivateBelief(User::One, normalized(own1.at(make_key(r, Fields{false, len, 0, len})))),
                PrivateBelief(User::Two, normalized(own2.at(make_key(r, Fields{false, 0, len, len})))),
                JointBelief(spec.m1, spec.m2, normalized(common.at(make_key(r, Fields{false, 0, 0, len}))))};
    }
};

using Law = std::map<BeliefKey, double>;

double law_distance(const Law& a, const Law& b) {
    double d = 0.0;
    for (const auto& [k, p] : a) {
        const auto it = b.find(k);
        d = std::max(d, std::abs(p - (it == b.end() ? 0.0 : it->second)));
    }
    for (const auto& [k, p] : b)
        if (!a.count(k)) d = std::max(d, p);
    return d;
}

}  // namespace

DeviationReport check_kernel_independence(const std::vector<PolicyTree>& policies, const Channel& ch, int n,
                                          std::size_t max_histories) {
    if (policies.empty()) fail(ErrorCode::InvalidArgument, "need at least one policy");
    DeviationReport rep;
    std::map<BeliefKey, Law> registry;  // (state key, action index) -> law seen first
    for (const auto& policy : policies) {
        check_stages(policy, n);
        const auto& spec = policy.spec();
        const auto records = enumerate_histories(policy, ch, n, max_histories);
        std::vector<PrefixPosteriors> prefix;
        for (int len = 0; len <= n; ++len) prefix.push_back(PrefixPosteriors::build(records, len, spec));

        for (int d = 0; d < n; ++d) {
            // group the length-(d+1) histories under their length-d parent
            std::unordered_map<BeliefKey, std::vector<std::size_t>, BeliefKeyHash> children;
            for (const auto& [key, entry] : prefix[static_cast<std::size_t>(d + 1)].full)
                children[make_key(records[entry.second], Fields{false, d, d, d})].push_back(entry.second);

            for (const auto& [key, entry] : prefix[static_cast<std::size_t>(d)].full) {
                const double mass = entry.first;
                if (mass <= 0.0) continue;
                ++rep.histories;
                const auto& r = records[entry.second];
                const auto state = prefix[static_cast<std::size_t>(d)].state_of(r, d, spec);
                const auto& node = policy.nodes()[r.node[static_cast<std::size_t>(d)]];

                Law empirical;
                for (std::size_t child : children[key]) {
                    const auto& rc = records[child];
                    const double pc =
                        prefix[static_cast<std::size_t>(d + 1)].full.at(make_key(rc, Fields{false, d + 1, d + 1, d + 1})).first;
                    if (pc <= 0.0) continue;
                    empirical[prefix[static_cast<std::size_t>(d + 1)].state_of(rc, d + 1, spec).key()] += pc / mass;
                }
                Law closed;
                for (const auto& b : joint_kernel_step(state, node.action, ch)) closed[b.next.key()] += b.prob;
                rep.max_deviation = std::max(rep.max_deviation, law_distance(empirical, closed));

                auto reg_key = state.key();
                reg_key.push_back(-9);
                reg_key.push_back(static_cast<std::int64_t>(*node.action_index));
                auto [it, inserted] = registry.try_emplace(std::move(reg_key), empirical);
                if (!inserted) rep.max_deviation = std::max(rep.max_deviation, law_distance(it->second, empirical));
            }
        }
    }
    rep.passed = rep.max_deviation < 1e-12;
    return rep;
}

namespace {

class PolicySearch {
public:
    PolicySearch(const ProblemSpec& spec, const Channel& ch, int n, const LambdaWeights& lambda, const Caps& caps,
                 std::vector<JointAction> actions)
        : spec_(spec), ch_(ch), n_(n), lambda_(lambda), caps_(caps), actions_(std::move(actions)),
          assignment_(static_cast<std::size_t>(n)) {}

    CapacitySearchResult run() {
        descend(0, {JointBelief::uniform(spec_.m1, spec_.m2)});
        if (!result_) fail(ErrorCode::InvalidArgument, "no policy was enumerated");
        result_->policies = count_;
        return std::move(*result_);
    }

private:
    using Assignment = std::unordered_map<BeliefKey, std::size_t, BeliefKeyHash>;

    void descend(int depth, const std::vector<JointBelief>& level) {
        if (depth == n_) {
            evaluate();
            return;
        }
        const std::size_t k = actions_.size();
        std::vector<std::size_t> digits(level.size(), 0);
        while (true) {
            auto& assign = assignment_[static_cast<std::size_t>(depth)];
            assign.clear();
            std::vector<JointBelief> next;
            std::unordered_map<BeliefKey, bool, BeliefKeyHash> seen;
            for (std::size_t i = 0; i < level.size(); ++i) {
                assign.emplace(level[i].key(), digits[i]);
                if (depth + 1 == n_) continue;
                const auto& action = actions_[digits[i]];
                const auto pz = output_distribution(level[i], action, ch_);
                for (int z = 0; z < ch_.z_size(); ++z) {
                    if (pz[static_cast<std::size_t>(z)] <= kPruneThreshold) continue;
                    auto child = belief_update(level[i], action, z, ch_);
                    if (seen.emplace(child.key(), true).second) next.push_back(std::move(child));
                }
            }
            descend(depth + 1, next);
            // odometer, first belief most significant
            std::size_t pos = digits.size();
            while (pos > 0 && ++digits[pos - 1] == k) digits[--pos] = 0;
            if (pos == 0) break;
        }
    }

    void evaluate() {
        if (++count_ > caps_.max_policies)
            fail(ErrorCode::BudgetExceeded, "policy enumeration exceeds the cap of " + std::to_string(caps_.max_policies));
        auto policy = make_policy(
            spec_, ch_, n_,
            [this](int depth, const JointBelief& b) {
                const auto& assign = assignment_[static_cast<std::size_t>(depth)];
                const auto it = assign.find(b.key());
                if (it == assign.end()) fail(ErrorCode::IncompletePolicy, "search assignment misses a belief");
                return actions_[it->second];
            },
            CostKind::ErrorProbability, caps_.max_nodes);
        auto breakdown = evaluate_In(policy, ch_, n_, lambda_, caps_.max_nodes);
        if (!result_ || breakdown.weighted > result_->best) {
            const double best = breakdown.weighted;
            result_ = CapacitySearchResult{best, std::move(policy), std::move(breakdown), 0};
        }
    }

    const ProblemSpec& spec_;
    const Channel& ch_;
    int n_;
    LambdaWeights lambda_;
    Caps caps_;
    std::vector<JointAction> actions_;
    std::vector<Assignment> assignment_;
    std::size_t count_ = 0;
    std::optional<CapacitySearchResult> result_;
};

}  // namespace

CapacitySearchResult search_Cn_lambda(const ProblemSpec& spec, const Channel& ch, int n, const LambdaWeights& lambda,
                                      const Caps& caps, const std::optional<std::vector<JointAction>>& action_set) {
    spec.validate();
    lambda.validate();
    if (n < 1) fail(ErrorCode::InvalidArgument, "horizon must be at least 1");
    std::vector<JointAction> actions;
    if (action_set) {
        if (action_set->empty()) fail(ErrorCode::InvalidArgument, "action set is empty");
        for (const auto& a : *action_set) a.validate(spec);
        actions = *action_set;
    } else {
        actions = ActionSpace(spec).all();
    }
    return PolicySearch(spec, ch, n, lambda, caps, std::move(actions)).run();
}

std::vector<SweepRow> lambda_sweep(const ProblemSpec& spec, const Channel& ch, int n,
                                   const std::vector<LambdaWeights>& lambdas, const Caps& caps) {
    std::vector<SweepRow> rows;
    rows.reserve(lambdas.size());
    for (const auto& lambda : lambdas) {
        SweepRow row;
        row.lambda = lambda;
        try {
            row.result = search_Cn_lambda(spec, ch, n, lambda, caps);
        } catch (const Error& e) {
            row.error = std::string(to_string(e.code())) + ": " + e.what();
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace dsaht
