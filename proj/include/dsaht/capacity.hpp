#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dsaht/dp.hpp"
#include "dsaht/model.hpp"

namespace dsaht {

/// Weights on (I(X1->Z||X2), I(X2->Z||X1), I(X1,X2->Z)).
struct LambdaWeights {
    double l1 = 0.0;
    double l2 = 0.0;
    double l3 = 0.0;

    void validate() const;
};

/// Private beliefs of both users together with the common belief.
struct JointState {
    PrivateBelief pihat1;
    PrivateBelief pihat2;
    JointBelief pi;

    static JointState initial(const ProblemSpec& spec);
    BeliefKey key() const;
};

/// H(Z | X1, X2) stage function.
double h0(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base = LogBase::Bits);
/// H(Z | X2-history, Z-history) stage function; uses pi(w1 | w2) and user 2's private belief.
double h1(const PrivateBelief& pihat2, const JointBelief& pi, const JointAction& e, const Channel& ch,
          LogBase base = LogBase::Bits);
/// Mirror of h1 for user 2's input.
double h2(const PrivateBelief& pihat1, const JointBelief& pi, const JointAction& e, const Channel& ch,
          LogBase base = LogBase::Bits);
/// H(Z | Z-history) stage function.
double h3(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base = LogBase::Bits);

struct StageRewards {
    double i1 = 0.0;
    double i2 = 0.0;
    double i3 = 0.0;
};

/// (h1 - h0, h2 - h0, h3 - h0). Only their expectations over the joint-state
/// law are conditional mutual informations; a single state may give a
/// negative i1 or i2 when its private belief disagrees with pi.
StageRewards stage_rewards(const JointState& state, const JointAction& e, const Channel& ch,
                           LogBase base = LogBase::Bits);

struct KernelBranch {
    double prob = 0.0;
    JointState next;
};

/// Law of the next (pihat1, pihat2, pi) given the current state and action,
/// branching over (x1, x2, z). Identical successor states are merged; the
/// branch order is the order of first appearance.
std::vector<KernelBranch> joint_kernel_step(const JointState& state, const JointAction& e, const Channel& ch);

/// Per-stage and averaged directed informations under a structured policy.
struct DirectedInfoBreakdown {
    std::vector<double> i1_t;
    std::vector<double> i2_t;
    std::vector<double> i3_t;
    double i1 = 0.0;  ///< I_n(X1 -> Z || X2)
    double i2 = 0.0;  ///< I_n(X2 -> Z || X1)
    double i3 = 0.0;  ///< I_n(X1, X2 -> Z)
    LambdaWeights lambda;
    double weighted = 0.0;
    /// (1/n) I(W1, W2; Z_{1:n}); only the full-history oracle fills this in.
    std::optional<double> message_information;
    bool clipped = false;  ///< a stage expectation in [-1e-6, -1e-12) was reset to zero
    std::size_t states = 0;
};

inline const char* kBoundType = "structured_deterministic_lower_bound";

/// Exact expectation of the stage rewards over the joint-state tree rooted at
/// the all-uniform state, over the first n stages of the policy. A stage
/// expectation below -1e-6 throws NegativeInformation; smaller negative
/// round-off is clipped to zero.
DirectedInfoBreakdown evaluate_In(const PolicyTree& policy, const Channel& ch, int n, const LambdaWeights& lambda,
                                  std::size_t max_states = Caps{}.max_nodes);

/// Oracle: builds P(w1, w2, z_{1:n}) by enumeration and takes every
/// conditional mutual information from marginals of the full joint.
DirectedInfoBreakdown full_history_In(const PolicyTree& policy, const Channel& ch, int n,
                                      const LambdaWeights& lambda, std::size_t max_histories = Caps{}.max_histories);

struct DeviationReport {
    double max_deviation = 0.0;
    std::size_t histories = 0;
    bool passed = true;  ///< max_deviation < 1e-12
};

/// Checks that the induced input law factorizes across users given the full
/// history, and that each factor equals sum_w 1{e(w) = x} pihat(w).
DeviationReport check_factorization(const PolicyTree& policy, const Channel& ch, int n,
                                    std::size_t max_histories = Caps{}.max_histories);

/// Checks that the law of the next joint state given a full history depends
/// only on (current joint state, action), across all supplied policies, and
/// agrees with joint_kernel_step.
DeviationReport check_kernel_independence(const std::vector<PolicyTree>& policies, const Channel& ch, int n,
                                          std::size_t max_histories = Caps{}.max_histories);

struct CapacitySearchResult {
    double best = 0.0;
    PolicyTree witness;
    DirectedInfoBreakdown breakdown;
    std::size_t policies = 0;
};

/// Exhaustive maximization of I_n(lambda) over structured deterministic tree
/// policies. This is a lower bound on C_n(lambda), not C_n(lambda) itself.
CapacitySearchResult search_Cn_lambda(const ProblemSpec& spec, const Channel& ch, int n,
                                      const LambdaWeights& lambda, const Caps& caps = {},
                                      const std::optional<std::vector<JointAction>>& action_set = std::nullopt);

struct SweepRow {
    LambdaWeights lambda;
    std::optional<CapacitySearchResult> result;
    std::string error;
};

/// Independent search per weight vector; a failing row records its error and
/// the sweep continues.
std::vector<SweepRow> lambda_sweep(const ProblemSpec& spec, const Channel& ch, int n,
                                   const std::vector<LambdaWeights>& lambdas, const Caps& caps = {});

}  // namespace dsaht
