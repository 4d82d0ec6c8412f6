#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dsaht/costs.hpp"
#include "dsaht/dp.hpp"

namespace dsaht {

struct TelescopingReport {
    double lhs = 0.0;       ///< E[terminal functional of Pi_n] by leaf enumeration
    double rhs = 0.0;       ///< initial term + sum_t E[c(Pi_{t-1}, E_t)]
    double residual = 0.0;  ///< |lhs - rhs|
    bool saturated = false;
};

/// Verifies that the instantaneous costs of `kind` sum, in expectation over
/// the policy's exact tree measure, to the terminal functional. Rejects the
/// terminal-only error-probability objective and horizons above 5.
TelescopingReport check_telescoping(const PolicyTree& policy, const Channel& ch, CostKind kind);

/// All joint beliefs whose entries are multiples of 1/resolution, enumerated
/// in lexicographic order of their count vectors.
class SimplexGrid {
public:
    SimplexGrid(int m1, int m2, int resolution);

    int m1() const { return m1_; }
    int m2() const { return m2_; }
    int resolution() const { return resolution_; }
    std::size_t size() const { return counts_.size(); }

    const std::vector<int>& counts(std::size_t i) const { return counts_[i]; }
    JointBelief point(std::size_t i) const;
    std::size_t index_of(std::span<const int> counts) const;

    /// Nearest grid point in L1 distance; among equally near points the
    /// lexicographically smallest count vector wins.
    std::size_t project(const JointBelief& belief) const;

    /// L1 distance between a belief and a grid point.
    double distance(const JointBelief& belief, std::size_t i) const;

private:
    int m1_;
    int m2_;
    int resolution_;
    std::vector<std::vector<int>> counts_;
    std::unordered_map<BeliefKey, std::size_t, BeliefKeyHash> index_;
};

enum class FixedPointMode { Discounted, Average };

std::string to_string(FixedPointMode mode);
FixedPointMode parse_fixed_point_mode(const std::string& text);

struct FixedPointOptions {
    FixedPointMode mode = FixedPointMode::Discounted;
    double beta = 0.9;
    double tol = 1e-10;
    int max_iter = 10'000;
};

struct FixedPointResult {
    FixedPointMode mode = FixedPointMode::Discounted;
    int resolution = 0;
    std::vector<double> value;
    std::vector<std::size_t> greedy_action;  ///< joint action index per grid point
    double gain = 0.0;                       ///< J for average mode, 0 otherwise
    bool near_zero_gain = false;
    std::size_t anchor = 0;                  ///< grid index used as the relative-value anchor
    int iterations = 0;
    double residual = 0.0;
    std::vector<double> residual_history;
    bool converged = false;
    double max_projection_error = 0.0;       ///< worst L1 distance of a continuation belief to its grid point
    bool saturated = false;
};

/// Value iteration (discounted) or relative value iteration anchored at the
/// grid point nearest the uniform belief (average cost) on a simplex grid.
/// Continuation beliefs are projected to their nearest grid point. Each sweep
/// writes a fresh table. Non-convergence is reported via `converged`.
FixedPointResult fixed_point_solve(const ProblemSpec& spec, const Channel& ch, CostKind cost,
                                   const SimplexGrid& grid, const FixedPointOptions& options);

}  // namespace dsaht
