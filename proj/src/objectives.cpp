#include "dsaht/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsaht {

TelescopingReport check_telescoping(const PolicyTree& policy, const Channel& ch, CostKind kind) {
    if (kind == CostKind::ErrorProbability)
        fail(ErrorCode::InvalidArgument, "error probability has no instantaneous decomposition");
    if (policy.horizon() > 5) fail(ErrorCode::InvalidArgument, "telescoping check is limited to horizons <= 5");
    const auto& spec = policy.spec();
    const auto& nodes = policy.nodes();

    TelescopingReport r;
    r.rhs = initial_term(kind, spec);
    std::vector<double> reach(nodes.size(), 0.0);
    reach[0] = 1.0;
    for (NodeId id = 0; id < nodes.size(); ++id) {
        const auto& node = nodes[id];
        if (node.depth == policy.horizon()) {
            const auto t = terminal_functional(kind, node.belief, spec.log_base);
            r.lhs += reach[id] * t.value;
            r.saturated = r.saturated || t.saturated;
            continue;
        }
        if (!node.action_index) fail(ErrorCode::IncompletePolicy, "policy node without an action");
        const auto c = instantaneous_cost(kind, node.belief, node.action, ch, spec.log_base);
        r.rhs += reach[id] * c.value;
        r.saturated = r.saturated || c.saturated;
        const auto pz = output_distribution(node.belief, node.action, ch);
        for (const auto& b : node.children) reach[b.child] += reach[id] * pz[static_cast<std::size_t>(b.z)];
    }
    r.residual = std::abs(r.lhs - r.rhs);
    return r;
}

namespace {

void compositions(int parts, int total, std::vector<int>& current, std::vector<std::vector<int>>& out) {
    if (static_cast<int>(current.size()) == parts - 1) {
        current.push_back(total);
        out.push_back(current);
        current.pop_back();
        return;
    }
    for (int c = 0; c <= total; ++c) {
        current.push_back(c);
        compositions(parts, total - c, current, out);
        current.pop_back();
    }
}

BeliefKey counts_key(std::span<const int> counts) { return BeliefKey(counts.begin(), counts.end()); }

}  // namespace

SimplexGrid::SimplexGrid(int m1, int m2, int resolution) : m1_(m1), m2_(m2), resolution_(resolution) {
    if (m1 < 1 || m2 < 1 || m1 * m2 < 2) fail(ErrorCode::InvalidArgument, "grid needs at least two message pairs");
    if (resolution < 2) fail(ErrorCode::InvalidArgument, "grid resolution must be at least 2");
    std::vector<int> current;
    compositions(m1 * m2, resolution, current, counts_);
    for (std::size_t i = 0; i < counts_.size(); ++i) index_.emplace(counts_key(counts_[i]), i);
}

JointBelief SimplexGrid::point(std::size_t i) const {
    std::vector<double> p(counts_[i].size());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = static_cast<double>(counts_[i][k]) / resolution_;
    return JointBelief(m1_, m2_, std::move(p));
}

std::size_t SimplexGrid::index_of(std::span<const int> counts) const {
    const auto it = index_.find(counts_key(counts));
    if (it == index_.end()) fail(ErrorCode::InvalidArgument, "count vector is not a grid point");
    return it->second;
}

std::size_t SimplexGrid::project(const JointBelief& belief) const {
    const auto p = belief.values();
    const std::size_t d = p.size();
    std::vector<int> c(d);
    std::vector<double> rem(d);
    int assigned = 0;
    for (std::size_t i = 0; i < d; ++i) {
        const double y = p[i] * resolution_;
        c[i] = static_cast<int>(std::floor(y));
        rem[i] = y - c[i];
        assigned += c[i];
    }
    // largest remainders get the leftover units; on ties the later coordinate
    // is bumped, which gives the lexicographically smaller count vector
    std::vector<std::size_t> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (rem[a] != rem[b]) return rem[a] > rem[b];
        return a > b;
    });
    int left = resolution_ - assigned;
    for (std::size_t k = 0; left > 0 && k < d; ++k, --left) ++c[order[k]];
    for (; left < 0; ++left) {
        // floating round-up overshoot; take the unit back from the smallest remainder
        const auto it = std::find_if(order.rbegin(), order.rend(), [&](std::size_t i) { return c[i] > 0; });
        --c[*it];
    }
    return index_of(c);
}

double SimplexGrid::distance(const JointBelief& belief, std::size_t i) const {
    double l1 = 0.0;
    const auto p = belief.values();
    for (std::size_t k = 0; k < p.size(); ++k)
        l1 += std::abs(p[k] - static_cast<double>(counts_[i][k]) / resolution_);
    return l1;
}

std::string to_string(FixedPointMode mode) { return mode == FixedPointMode::Discounted ? "discounted" : "average"; }

FixedPointMode parse_fixed_point_mode(const std::string& text) {
    if (text == "discounted") return FixedPointMode::Discounted;
    if (text == "average") return FixedPointMode::Average;
    fail(ErrorCode::InvalidArgument, "fixed-point mode must be 'discounted' or 'average'");
}

namespace {

struct Outcome {
    double prob;
    std::size_t next;
};

struct Choice {
    double cost;
    std::vector<Outcome> outcomes;
};

}  // namespace

FixedPointResult fixed_point_solve(const ProblemSpec& spec, const Channel& ch, CostKind cost,
                                   const SimplexGrid& grid, const FixedPointOptions& options) {
    spec.validate();
    if (cost == CostKind::ErrorProbability)
        fail(ErrorCode::InvalidArgument, "error probability is terminal-only and has no stationary form");
    if (grid.m1() != spec.m1 || grid.m2() != spec.m2)
        fail(ErrorCode::DimensionMismatch, "grid message sizes differ from the problem");
    if (options.mode == FixedPointMode::Discounted && !(options.beta > 0.0 && options.beta < 1.0))
        fail(ErrorCode::InvalidArgument, "discount factor must lie in (0, 1)");
    if (!(options.tol > 0.0) || options.max_iter < 1)
        fail(ErrorCode::InvalidArgument, "tolerance and iteration limit must be positive");

    const auto actions = ActionSpace(spec).all();
    const std::size_t points = grid.size();
    FixedPointResult r;
    r.mode = options.mode;
    r.resolution = grid.resolution();
    r.anchor = grid.project(JointBelief::uniform(spec.m1, spec.m2));

    // one-time model: stage cost and projected continuation law per (point, action)
    std::vector<std::vector<Choice>> model(points);
    for (std::size_t g = 0; g < points; ++g) {
        const auto pi = grid.point(g);
        model[g].reserve(actions.size());
        for (const auto& action : actions) {
            const auto c = instantaneous_cost(cost, pi, action, ch, spec.log_base);
            r.saturated = r.saturated || c.saturated;
            Choice choice{c.value, {}};
            const auto pz = output_distribution(pi, action, ch);
            for (int z = 0; z < ch.z_size(); ++z) {
                const double p = pz[static_cast<std::size_t>(z)];
                if (p <= kPruneThreshold) continue;
                const auto next = belief_update(pi, action, z, ch);
                const auto idx = grid.project(next);
                r.max_projection_error = std::max(r.max_projection_error, grid.distance(next, idx));
                choice.outcomes.push_back({p, idx});
            }
            model[g].push_back(std::move(choice));
        }
    }

    const double weight = options.mode == FixedPointMode::Discounted ? options.beta : 1.0;
    std::vector<double> v(points, 0.0);
    std::vector<double> next(points);
    std::vector<std::size_t> greedy(points, 0);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        for (std::size_t g = 0; g < points; ++g) {
            double best = 0.0;
            std::size_t arg = 0;
            for (std::size_t a = 0; a < model[g].size(); ++a) {
                const auto& choice = model[g][a];
                double q = choice.cost;
                for (const auto& o : choice.outcomes) q += weight * o.prob * v[o.next];
                if (a == 0 || q < best - 1e-14 * std::max(1.0, std::abs(best))) {
                    best = q;
                    arg = a;
                }
            }
            next[g] = best;
            greedy[g] = arg;
        }
        if (options.mode == FixedPointMode::Average) {
            r.gain = next[r.anchor];
            for (double& x : next) x -= r.gain;
        }
        double residual = 0.0;
        for (std::size_t g = 0; g < points; ++g) residual = std::max(residual, std::abs(next[g] - v[g]));
        v.swap(next);
        r.iterations = iter;
        r.residual = residual;
        r.residual_history.push_back(residual);
        if (residual < options.tol) {
            r.converged = true;
            break;
        }
    }
    r.value = std::move(v);
    r.greedy_action = std::move(greedy);
    r.near_zero_gain = options.mode == FixedPointMode::Average && std::abs(r.gain) < 1e-9;
    return r;
}

}  // namespace dsaht
