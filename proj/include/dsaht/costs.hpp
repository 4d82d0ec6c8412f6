#pragma once

#include <string>

#include "dsaht/model.hpp"

namespace dsaht {

/// Objectives the common agent can minimize. Error probability is terminal
/// only; the others are time-invariant instantaneous costs c(pi, e) whose
/// sums telescope to a terminal functional of the final belief.
enum class CostKind {
    ErrorProbability,
    JointEntropyDrift,
    ConditionalEntropyDriftUser1,
    ConditionalEntropyDriftUser2,
    Ejs,
};

std::string to_string(CostKind kind);
CostKind parse_cost_kind(const std::string& text);

/// KL divergences with a support mismatch are reported as this many log units.
inline constexpr double kKlSaturation = 1e6;

struct CostValue {
    double value = 0.0;
    bool saturated = false;
};

/// -I(W1,W2; Z | pi, e): expected one-step drift of log pi(W1,W2).
double cost_joint_entropy(const JointBelief& pi, const JointAction& e, const Channel& ch,
                          LogBase base = LogBase::Bits);

/// -I(W_i; Z | W_j, pi, e) for the requested user i.
double cost_conditional_entropy(const JointBelief& pi, const JointAction& e, const Channel& ch, User user,
                                LogBase base = LogBase::Bits);

/// Negative extrinsic Jensen-Shannon divergence of the pair hypotheses.
/// Pairs with 1 - pi(w) < 1e-12 are skipped.
CostValue cost_ejs(const JointBelief& pi, const JointAction& e, const Channel& ch, LogBase base = LogBase::Bits);

/// Dispatches on kind; ErrorProbability has zero instantaneous cost.
CostValue instantaneous_cost(CostKind kind, const JointBelief& pi, const JointAction& e, const Channel& ch,
                             LogBase base = LogBase::Bits);

/// Terminal functional whose expectation the instantaneous costs telescope to:
/// 1 - max pi, E[-log pi(W)], E[-log pi(W_i | W_j)] or E[-log(pi(W)/(1-pi(W)))].
CostValue terminal_functional(CostKind kind, const JointBelief& pi, LogBase base = LogBase::Bits);

/// Value of the terminal functional at the uniform prior.
double initial_term(CostKind kind, const ProblemSpec& spec);

}  // namespace dsaht
