#include "dsaht/dp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dsaht/channels.hpp"

namespace dsaht {

namespace {

constexpr double kTieTolerance = 1e-14;

using DepthIndex = std::vector<std::unordered_map<BeliefKey, NodeId, BeliefKeyHash>>;

void check_horizon(int horizon) {
    if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be at least 1");
}

/// Returns the id of the node holding `belief` at `depth`, appending it when new.
template <typename Node>
NodeId intern(std::vector<Node>& nodes, DepthIndex& index, int depth, JointBelief belief, std::size_t max_nodes) {
    auto [it, inserted] = index[static_cast<std::size_t>(depth)].try_emplace(belief.key(), nodes.size());
    if (inserted) {
        if (nodes.size() >= max_nodes)
            fail(ErrorCode::BudgetExceeded,
                 "belief tree exceeds the node cap of " + std::to_string(max_nodes));
        Node node;
        node.depth = depth;
        node.belief = std::move(belief);
        nodes.push_back(std::move(node));
    }
    return it->second;
}

/// Expands one action out of a belief, interning the children.
template <typename Node>
Transition expand(std::vector<Node>& nodes, DepthIndex& index, const JointBelief& belief, int depth,
                  const JointAction& action, const Channel& ch, std::size_t max_nodes) {
    Transition tr;
    const auto pz = output_distribution(belief, action, ch);
    for (int z = 0; z < ch.z_size(); ++z) {
        const double p = pz[static_cast<std::size_t>(z)];
        if (p <= kPruneThreshold) {
            tr.pruned_mass += p;
            continue;
        }
        auto child = belief_update(belief, action, z, ch);
        tr.branches.push_back({z, p, intern(nodes, index, depth + 1, std::move(child), max_nodes)});
    }
    return tr;
}

double leaf_value(CostKind kind, const JointBelief& belief) {
    return kind == CostKind::ErrorProbability ? terminal_cost(belief) : 0.0;
}

double stage_cost(CostKind kind, const JointBelief& belief, const JointAction& action, const Channel& ch,
                  LogBase base) {
    return instantaneous_cost(kind, belief, action, ch, base).value;
}

}  // namespace

std::size_t BeliefTree::count_at_depth(int depth) const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                                  [depth](const BeliefNode& n) { return n.depth == depth; }));
}

BeliefTree build_reachable_tree(const ProblemSpec& spec, const Channel& ch, int horizon,
                                const std::optional<std::vector<JointAction>>& action_set, std::size_t max_nodes) {
    spec.validate();
    check_horizon(horizon);
    const ActionSpace space(spec);

    BeliefTree tree;
    tree.spec_ = spec;
    tree.horizon_ = horizon;
    if (action_set) {
        if (action_set->empty()) fail(ErrorCode::InvalidArgument, "action set is empty");
        tree.restricted_ = true;
        tree.actions_ = *action_set;
        for (const auto& a : tree.actions_) tree.action_indices_.push_back(space.index(a));
    } else {
        tree.actions_ = space.all();
        for (std::size_t i = 0; i < tree.actions_.size(); ++i) tree.action_indices_.push_back(i);
    }

    DepthIndex index(static_cast<std::size_t>(horizon) + 1);
    intern(tree.nodes_, index, 0, JointBelief::uniform(spec.m1, spec.m2), max_nodes);
    for (NodeId id = 0; id < tree.nodes_.size(); ++id) {
        const int depth = tree.nodes_[id].depth;
        if (depth == horizon) continue;
        const JointBelief belief = tree.nodes_[id].belief;
        std::vector<Transition> transitions;
        transitions.reserve(tree.actions_.size());
        for (const auto& action : tree.actions_)
            transitions.push_back(expand(tree.nodes_, index, belief, depth, action, ch, max_nodes));
        tree.nodes_[id].transitions = std::move(transitions);
    }
    return tree;
}

PolicyTree::PolicyTree(ProblemSpec spec, int horizon, CostKind objective, std::vector<PolicyNode> nodes,
                       bool restricted)
    : spec_(spec), horizon_(horizon), objective_(objective), restricted_(restricted), nodes_(std::move(nodes)) {
    if (nodes_.empty()) fail(ErrorCode::IncompletePolicy, "policy has no nodes");
    index_.resize(static_cast<std::size_t>(horizon_) + 1);
    for (NodeId id = 0; id < nodes_.size(); ++id) {
        const auto depth = nodes_[id].depth;
        if (depth < 0 || depth > horizon_) fail(ErrorCode::InvalidArgument, "policy node depth out of range");
        index_[static_cast<std::size_t>(depth)].try_emplace(nodes_[id].belief.key(), id);
    }
}

std::optional<NodeId> PolicyTree::find(int depth, const JointBelief& belief) const {
    if (depth < 0 || depth > horizon_) return std::nullopt;
    const auto& level = index_[static_cast<std::size_t>(depth)];
    const auto it = level.find(belief.key());
    if (it == level.end()) return std::nullopt;
    return it->second;
}

const PolicyNode& PolicyTree::node_at(int depth, const JointBelief& belief) const {
    const auto id = find(depth, belief);
    if (!id || (depth < horizon_ && !nodes_[*id].action_index))
        fail(ErrorCode::IncompletePolicy, "policy assigns no action to a reachable belief at depth " +
                                              std::to_string(depth));
    return nodes_[*id];
}

DpSolution backward_dp(const BeliefTree& tree, const Channel& ch, CostKind cost) {
    const auto& nodes = tree.nodes();
    const auto base = tree.spec().log_base;
    ValueAnnotation ann;
    ann.value.assign(nodes.size(), 0.0);
    ann.best.assign(nodes.size(), std::nullopt);

    // children always carry larger ids than their parents
    for (NodeId id = nodes.size(); id-- > 0;) {
        const auto& node = nodes[id];
        if (node.depth == tree.horizon()) {
            ann.value[id] = leaf_value(cost, node.belief);
            continue;
        }
        double best_value = 0.0;
        std::optional<std::size_t> best;
        for (std::size_t k = 0; k < node.transitions.size(); ++k) {
            double v = stage_cost(cost, node.belief, tree.actions()[k], ch, base);
            for (const auto& b : node.transitions[k].branches) v += b.prob * ann.value[b.child];
            if (!best || v < best_value - kTieTolerance * std::max(1.0, std::abs(best_value))) {
                best = k;
                best_value = v;
            }
        }
        ann.value[id] = best_value;
        ann.best[id] = best;
    }

    // keep only the nodes reached under the chosen actions
    std::vector<PolicyNode> out;
    std::vector<std::optional<NodeId>> remap(nodes.size());
    remap[0] = 0;
    out.push_back({nodes[0].depth, nodes[0].belief, std::nullopt, {}, ann.value[0], {}, 0.0});
    for (NodeId id = 0; id < nodes.size(); ++id) {
        if (!remap[id] || !ann.best[id]) continue;
        const auto k = *ann.best[id];
        const auto& tr = nodes[id].transitions[k];
        PolicyNode& pn = out[*remap[id]];
        pn.action_index = tree.action_indices()[k];
        pn.action = tree.actions()[k];
        pn.pruned_mass = tr.pruned_mass;
        std::vector<Branch> children;
        for (const auto& b : tr.branches) {
            if (!remap[b.child]) {
                remap[b.child] = out.size();
                const auto& child = nodes[b.child];
                out.push_back({child.depth, child.belief, std::nullopt, {}, ann.value[b.child], {}, 0.0});
            }
            children.push_back({b.z, b.prob, *remap[b.child]});
        }
        out[*remap[id]].children = std::move(children);
    }
    return {PolicyTree(tree.spec(), tree.horizon(), cost, std::move(out), tree.restricted()), std::move(ann)};
}

DpSolution solve_dp(const ProblemSpec& spec, const Channel& ch, int horizon, CostKind cost, const Caps& caps) {
    return backward_dp(build_reachable_tree(spec, ch, horizon, std::nullopt, caps.max_nodes), ch, cost);
}

PolicyTree make_policy(const ProblemSpec& spec, const Channel& ch, int horizon, const ActionChooser& choose,
                       CostKind objective, std::size_t max_nodes) {
    spec.validate();
    check_horizon(horizon);
    const ActionSpace space(spec);
    std::vector<PolicyNode> nodes;
    DepthIndex index(static_cast<std::size_t>(horizon) + 1);
    intern(nodes, index, 0, JointBelief::uniform(spec.m1, spec.m2), max_nodes);
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const int depth = nodes[id].depth;
        if (depth == horizon) continue;
        const JointBelief belief = nodes[id].belief;
        JointAction action = choose(depth, belief);
        const auto action_index = space.index(action);
        auto tr = expand(nodes, index, belief, depth, action, ch, max_nodes);
        auto& node = nodes[id];
        node.action_index = action_index;
        node.action = std::move(action);
        node.children = std::move(tr.branches);
        node.pruned_mass = tr.pruned_mass;
    }
    for (NodeId id = nodes.size(); id-- > 0;) {
        auto& node = nodes[id];
        if (node.depth == horizon) {
            node.value = leaf_value(objective, node.belief);
            continue;
        }
        double v = stage_cost(objective, node.belief, node.action, ch, spec.log_base);
        for (const auto& b : node.children) v += b.prob * nodes[b.child].value;
        node.value = v;
    }
    return PolicyTree(spec, horizon, objective, std::move(nodes));
}

PolicyTree constant_policy(const ProblemSpec& spec, const Channel& ch, int horizon, const JointAction& action) {
    return make_policy(spec, ch, horizon, [&](int, const JointBelief&) { return action; });
}

JointAction identity_action(const ProblemSpec& spec) {
    JointAction a;
    for (int w = 0; w < spec.m1; ++w) a.e1.map.push_back(w % spec.x1_size);
    for (int w = 0; w < spec.m2; ++w) a.e2.map.push_back(w % spec.x2_size);
    return a;
}

PolicyTree seeded_policy(const ProblemSpec& spec, const Channel& ch, int horizon, std::uint64_t seed,
                         std::size_t max_nodes) {
    const ActionSpace space(spec);
    return make_policy(
        spec, ch, horizon,
        [&](int depth, const JointBelief& belief) {
            std::uint64_t h = splitmix64(seed ^ static_cast<std::uint64_t>(depth));
            for (auto k : belief.key()) h = splitmix64(h ^ static_cast<std::uint64_t>(k));
            return space.action(static_cast<std::size_t>(h % space.size()));
        },
        CostKind::ErrorProbability, max_nodes);
}

double evaluate_policy_exact(const PolicyTree& policy, const Channel& ch) {
    const auto& nodes = policy.nodes();
    std::vector<double> reach(nodes.size(), 0.0);
    reach[0] = 1.0;
    double pe = 0.0;
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const auto& node = nodes[id];
        if (node.depth == policy.horizon()) {
            pe += reach[id] * terminal_cost(node.belief);
            continue;
        }
        if (reach[id] == 0.0) continue;
        if (!node.action_index)
            fail(ErrorCode::IncompletePolicy, "node " + std::to_string(id) + " has no action");
        const auto pz = output_distribution(node.belief, node.action, ch);
        for (int z = 0; z < ch.z_size(); ++z) {
            const double p = pz[static_cast<std::size_t>(z)];
            if (p <= kPruneThreshold) continue;
            const auto it = std::find_if(node.children.begin(), node.children.end(),
                                         [z](const Branch& b) { return b.z == z; });
            if (it == node.children.end() || it->child <= id)
                fail(ErrorCode::IncompletePolicy, "node " + std::to_string(id) + " lacks a branch for output " +
                                                      std::to_string(z));
            reach[it->child] += reach[id] * p;
        }
    }
    return pe;
}

namespace {

/// Counter-based stream: the k-th draw of a trial depends only on (seed, trial, k).
class TrialStream {
public:
    TrialStream(std::uint64_t seed, std::uint64_t trial) : state_(splitmix64(splitmix64(seed) ^ trial)) {}
    double uniform() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return unit_interval(splitmix64(state_));
    }

private:
    std::uint64_t state_;
};

int sample_index(std::span<const double> p, double u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += p[i];
        if (u < acc) return static_cast<int>(i);
    }
    // u landed in the rounding slack at the top; take the last positive entry
    for (std::size_t i = p.size(); i-- > 0;)
        if (p[i] > 0.0) return static_cast<int>(i);
    return 0;
}

}  // namespace

MonteCarloResult simulate_monte_carlo(const PolicyTree& policy, const Channel& ch, std::uint64_t trials,
                                      std::uint64_t seed) {
    if (trials < 1) fail(ErrorCode::InvalidArgument, "need at least one trial");
    const auto& spec = policy.spec();
    const auto& nodes = policy.nodes();
    MonteCarloResult r;
    r.trials = trials;
    for (std::uint64_t t = 0; t < trials; ++t) {
        TrialStream rng(seed, t);
        const int w1 = std::min(spec.m1 - 1, static_cast<int>(rng.uniform() * spec.m1));
        const int w2 = std::min(spec.m2 - 1, static_cast<int>(rng.uniform() * spec.m2));
        NodeId id = 0;
        while (nodes[id].depth < policy.horizon()) {
            const auto& node = nodes[id];
            if (!node.action_index) fail(ErrorCode::IncompletePolicy, "simulation reached a node without an action");
            const int z = sample_index(ch.row(node.action.e1(w1), node.action.e2(w2)), rng.uniform());
            const auto it = std::find_if(node.children.begin(), node.children.end(),
                                         [z](const Branch& b) { return b.z == z; });
            if (it == node.children.end())
                fail(ErrorCode::IncompletePolicy, "simulation drew an output the policy does not cover");
            id = it->child;
        }
        if (!(ml_decode(nodes[id].belief) == MessagePair{w1, w2})) ++r.errors;
    }
    const double n = static_cast<double>(trials);
    r.estimate = static_cast<double>(r.errors) / n;
    r.half_width = 1.96 * std::sqrt(r.estimate * (1.0 - r.estimate) / n);
    return r;
}

namespace {

struct IndependenceWalk {
    const Channel& ch;
    const std::vector<JointAction>& actions;
    int horizon;
    std::size_t max_histories;
    PolicyIndependenceReport report;

    void visit(const JointBelief& pi, const std::vector<double>& likelihood, int depth) {
        const int m1 = pi.m1();
        const int m2 = pi.m2();
        for (const auto& action : actions) {
            for (int z = 0; z < ch.z_size(); ++z) {
                std::vector<double> next_lik(likelihood.size());
                double total = 0.0;
                for (int w1 = 0; w1 < m1; ++w1)
                    for (int w2 = 0; w2 < m2; ++w2) {
                        const auto k = static_cast<std::size_t>(w1 * m2 + w2);
                        next_lik[k] = likelihood[k] * pair_likelihood(ch, action, w1, w2, z);
                        total += next_lik[k];
                    }
                if (!(total > 0.0)) continue;
                if (++report.histories > max_histories)
                    fail(ErrorCode::BudgetExceeded, "history enumeration exceeds the cap of " +
                                                        std::to_string(max_histories));
                const auto next = belief_update(pi, action, z, ch);
                for (std::size_t k = 0; k < next_lik.size(); ++k)
                    report.max_deviation =
                        std::max(report.max_deviation, std::abs(next.values()[k] - next_lik[k] / total));
                if (depth + 1 < horizon) visit(next, next_lik, depth + 1);
            }
        }
    }
};

}  // namespace

PolicyIndependenceReport check_policy_independence(const ProblemSpec& spec, const Channel& ch, int horizon,
                                                   const std::optional<std::vector<JointAction>>& action_set,
                                                   std::size_t max_histories) {
    spec.validate();
    check_horizon(horizon);
    const auto actions = action_set ? *action_set : ActionSpace(spec).all();
    IndependenceWalk walk{ch, actions, horizon, max_histories, {}};
    walk.visit(JointBelief::uniform(spec.m1, spec.m2), std::vector<double>(static_cast<std::size_t>(spec.pairs()), 1.0), 0);
    return walk.report;
}

}  // namespace dsaht
