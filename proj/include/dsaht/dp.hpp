#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <unordered_map>
#include <vector>

#include "dsaht/costs.hpp"
#include "dsaht/model.hpp"

namespace dsaht {

/// Enumeration budgets. Growth is double exponential in the horizon, so every
/// enumerator checks its cap and throws BudgetExceeded instead of hanging.
struct Caps {
    std::size_t max_nodes = 5'000'000;
    std::size_t max_strategies = 10'000'000;
    std::size_t max_histories = 10'000'000;
    std::size_t max_policies = 1'000'000;
};

using NodeId = std::size_t;

/// Observation branches with probability at or below this are pruned.
inline constexpr double kPruneThreshold = 1e-300;

struct Branch {
    int z = 0;
    double prob = 0.0;
    NodeId child = 0;
};

struct Transition {
    std::vector<Branch> branches;
    double pruned_mass = 0.0;
};

struct BeliefNode {
    int depth = 0;
    JointBelief belief;
    /// One transition per candidate action (parallel to BeliefTree::actions());
    /// empty at depth == horizon.
    std::vector<Transition> transitions;
};

/// All beliefs reachable from the uniform prior within the horizon under any
/// candidate action and any positive-probability output sequence. Nodes are
/// merged by canonical belief within a depth and stored in depth order.
class BeliefTree {
public:
    const ProblemSpec& spec() const { return spec_; }
    int horizon() const { return horizon_; }
    const std::vector<JointAction>& actions() const { return actions_; }
    /// Index of each candidate action in the full ActionSpace.
    const std::vector<std::size_t>& action_indices() const { return action_indices_; }
    bool restricted() const { return restricted_; }
    const std::vector<BeliefNode>& nodes() const { return nodes_; }
    std::size_t count_at_depth(int depth) const;

private:
    friend BeliefTree build_reachable_tree(const ProblemSpec&, const Channel&, int,
                                           const std::optional<std::vector<JointAction>>&, std::size_t);
    ProblemSpec spec_;
    int horizon_ = 0;
    std::vector<JointAction> actions_;
    std::vector<std::size_t> action_indices_;
    bool restricted_ = false;
    std::vector<BeliefNode> nodes_;
};

BeliefTree build_reachable_tree(const ProblemSpec& spec, const Channel& ch, int horizon,
                                const std::optional<std::vector<JointAction>>& action_set = std::nullopt,
                                std::size_t max_nodes = Caps{}.max_nodes);

struct PolicyNode {
    int depth = 0;
    JointBelief belief;
    std::optional<std::size_t> action_index;  ///< into ActionSpace; empty at leaves
    JointAction action;
    double value = 0.0;                        ///< value-to-go under the tree's objective
    std::vector<Branch> children;
    double pruned_mass = 0.0;
};

/// A deterministic structured policy: one joint action per reachable belief
/// node, nodes merged per depth by canonical belief.
class PolicyTree {
public:
    PolicyTree() = default;
    PolicyTree(ProblemSpec spec, int horizon, CostKind objective, std::vector<PolicyNode> nodes,
               bool restricted = false);

    const ProblemSpec& spec() const { return spec_; }
    int horizon() const { return horizon_; }
    CostKind objective() const { return objective_; }
    bool restricted() const { return restricted_; }
    const std::vector<PolicyNode>& nodes() const { return nodes_; }
    const PolicyNode& root() const { return nodes_.front(); }
    double root_value() const { return nodes_.front().value; }

    std::optional<NodeId> find(int depth, const JointBelief& belief) const;
    /// Throws IncompletePolicy when no action is assigned at (depth, belief).
    const PolicyNode& node_at(int depth, const JointBelief& belief) const;

private:
    ProblemSpec spec_;
    int horizon_ = 0;
    CostKind objective_ = CostKind::ErrorProbability;
    bool restricted_ = false;
    std::vector<PolicyNode> nodes_;
    std::vector<std::unordered_map<BeliefKey, NodeId, BeliefKeyHash>> index_;
};

/// Per-node value-to-go V_t, parallel to BeliefTree::nodes().
struct ValueAnnotation {
    std::vector<double> value;
    std::vector<std::optional<std::size_t>> best;  ///< position in tree.actions()
};

struct DpSolution {
    PolicyTree policy;
    ValueAnnotation values;
};

/// Backward induction on the reachable tree. Ties go to the smallest joint
/// action index.
DpSolution backward_dp(const BeliefTree& tree, const Channel& ch, CostKind cost = CostKind::ErrorProbability);

/// Convenience: build_reachable_tree followed by backward_dp.
DpSolution solve_dp(const ProblemSpec& spec, const Channel& ch, int horizon,
                    CostKind cost = CostKind::ErrorProbability, const Caps& caps = {});

using ActionChooser = std::function<JointAction(int depth, const JointBelief& belief)>;

/// Expands the tree reached by a caller-chosen action rule and annotates
/// node values with the policy's own value-to-go under `objective`.
PolicyTree make_policy(const ProblemSpec& spec, const Channel& ch, int horizon, const ActionChooser& choose,
                       CostKind objective = CostKind::ErrorProbability, std::size_t max_nodes = Caps{}.max_nodes);

PolicyTree constant_policy(const ProblemSpec& spec, const Channel& ch, int horizon, const JointAction& action);

/// e_i(w) = w mod |X_i| for both users.
JointAction identity_action(const ProblemSpec& spec);

/// A fixed but arbitrary policy: the action at each node is drawn from a hash
/// of (seed, depth, canonical belief).
PolicyTree seeded_policy(const ProblemSpec& spec, const Channel& ch, int horizon, std::uint64_t seed,
                         std::size_t max_nodes = Caps{}.max_nodes);

/// Forward pass: E[1 - max Pi_n] under the policy, with transition
/// probabilities recomputed from the channel.
double evaluate_policy_exact(const PolicyTree& policy, const Channel& ch);

struct MonteCarloResult {
    double estimate = 0.0;
    double half_width = 0.0;  ///< 1.96 sqrt(p(1-p)/trials)
    std::uint64_t trials = 0;
    std::uint64_t errors = 0;
};

/// Each trial draws from its own generator seeded by (seed, trial index).
MonteCarloResult simulate_monte_carlo(const PolicyTree& policy, const Channel& ch, std::uint64_t trials,
                                      std::uint64_t seed);

struct PolicyIndependenceReport {
    double max_deviation = 0.0;
    std::size_t histories = 0;
};

/// For every action/output history of length <= horizon with positive
/// probability, compares the recursively updated belief with the posterior
/// obtained by multiplying likelihoods from the uniform prior and normalizing
/// once.
PolicyIndependenceReport check_policy_independence(const ProblemSpec& spec, const Channel& ch, int horizon,
                                                   const std::optional<std::vector<JointAction>>& action_set = std::nullopt,
                                                   std::size_t max_histories = Caps{}.max_histories);

}  // namespace dsaht
