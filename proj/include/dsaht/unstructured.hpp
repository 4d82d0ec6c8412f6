#pragma once

// Exhaustive oracles for tiny problems. Everything here is templated on the
// scalar so the same enumeration runs in double precision or in exact
// rational arithmetic. Channel entries convert exactly and each row is then
// renormalized in the scalar type, so rows sum to exactly one.

#include <algorithm>
#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "dsaht/model.hpp"

namespace dsaht {

using Rational = boost::multiprecision::cpp_rational;

template <typename Scalar>
double to_double(const Scalar& x) {
    return static_cast<double>(x);
}

template <>
inline double to_double<Rational>(const Rational& x) {
    return x.template convert_to<double>();
}

/// An unstructured deterministic strategy: for each user and time t (0-based),
/// a table x = f_t(w, z_{1:t}) indexed by w * |Z|^t + (z history as a base-|Z|
/// numeral, oldest output most significant).
struct UnstructuredStrategy {
    std::vector<std::vector<int>> user1;
    std::vector<std::vector<int>> user2;
};

template <typename Scalar>
struct UnstructuredResult {
    Scalar min_error{};
    UnstructuredStrategy witness;
    std::size_t strategies = 0;
};

namespace detail {

inline std::size_t int_pow(std::size_t base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

/// Number of table entries one user's strategy needs over the horizon.
inline std::size_t strategy_entries(int messages, int z_size, int horizon) {
    std::size_t n = 0;
    for (int t = 0; t < horizon; ++t) n += static_cast<std::size_t>(messages) * int_pow(static_cast<std::size_t>(z_size), t);
    return n;
}

/// alphabet^entries, or max() on overflow past `limit`.
inline std::size_t strategy_count(int alphabet, std::size_t entries, std::size_t limit) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < entries; ++i) {
        if (r > limit / static_cast<std::size_t>(alphabet)) return std::numeric_limits<std::size_t>::max();
        r *= static_cast<std::size_t>(alphabet);
    }
    return r;
}

template <typename Scalar>
std::vector<Scalar> scalar_table(const Channel& ch) {
    const auto raw = ch.table();
    const auto z = static_cast<std::size_t>(ch.z_size());
    std::vector<Scalar> q(raw.size());
    for (std::size_t r = 0; r < raw.size(); r += z) {
        Scalar sum(0);
        for (std::size_t k = 0; k < z; ++k) sum += Scalar(raw[r + k]);
        for (std::size_t k = 0; k < z; ++k) q[r + k] = Scalar(raw[r + k]) / sum;
    }
    return q;
}

/// Unpacks the index-th strategy (mixed radix, first entry most significant)
/// into per-time tables.
inline std::vector<std::vector<int>> decode_strategy(std::size_t index, int alphabet, int messages, int z_size,
                                                     int horizon) {
    std::vector<std::vector<int>> tables(static_cast<std::size_t>(horizon));
    for (int t = 0; t < horizon; ++t)
        tables[static_cast<std::size_t>(t)].resize(static_cast<std::size_t>(messages) *
                                                   int_pow(static_cast<std::size_t>(z_size), t));
    for (int t = horizon; t-- > 0;) {
        auto& table = tables[static_cast<std::size_t>(t)];
        for (std::size_t k = table.size(); k-- > 0;) {
            table[k] = static_cast<int>(index % static_cast<std::size_t>(alphabet));
            index /= static_cast<std::size_t>(alphabet);
        }
    }
    return tables;
}

}  // namespace detail

/// Minimum error probability over every deterministic encoder family
/// x_t = f_t(w, z_{1:t-1}) with maximum-likelihood decoding.
template <typename Scalar>
UnstructuredResult<Scalar> brute_force_unstructured(const ProblemSpec& spec, const Channel& ch, int horizon,
                                                    std::size_t max_strategies) {
    spec.validate();
    if (horizon < 1) fail(ErrorCode::InvalidArgument, "horizon must be at least 1");
    const int Z = spec.z_size;
    const auto e1 = detail::strategy_entries(spec.m1, Z, horizon);
    const auto e2 = detail::strategy_entries(spec.m2, Z, horizon);
    const auto s1 = detail::strategy_count(spec.x1_size, e1, max_strategies);
    const auto s2 = detail::strategy_count(spec.x2_size, e2, max_strategies);
    if (s1 > max_strategies || s2 > max_strategies || s1 > max_strategies / s2)
        fail(ErrorCode::BudgetExceeded, "unstructured strategy count exceeds the cap of " +
                                            std::to_string(max_strategies));

    const auto q = detail::scalar_table<Scalar>(ch);
    auto Q = [&](int x1, int x2, int z) {
        return q[static_cast<std::size_t>((x1 * spec.x2_size + x2) * Z + z)];
    };

    const std::size_t sequences = detail::int_pow(static_cast<std::size_t>(Z), horizon);
    const Scalar prior = Scalar(1) / Scalar(spec.pairs());

    UnstructuredResult<Scalar> result;
    result.strategies = s1 * s2;
    bool have_best = false;
    std::vector<Scalar> best_joint(sequences);
    std::vector<Scalar> path(static_cast<std::size_t>(horizon) + 1);

    for (std::size_t i1 = 0; i1 < s1; ++i1) {
        const auto f1 = detail::decode_strategy(i1, spec.x1_size, spec.m1, Z, horizon);
        for (std::size_t i2 = 0; i2 < s2; ++i2) {
            const auto f2 = detail::decode_strategy(i2, spec.x2_size, spec.m2, Z, horizon);
            // best_joint[s] = max_w P(w, z_{1:n} = s)
            std::fill(best_joint.begin(), best_joint.end(), Scalar(0));
            for (int w1 = 0; w1 < spec.m1; ++w1)
                for (int w2 = 0; w2 < spec.m2; ++w2)
                    for (std::size_t s = 0; s < sequences; ++s) {
                        Scalar p = prior;
                        std::size_t hist = 0;
                        std::size_t scale = 1;
                        for (int t = 0; t < horizon; ++t) {
                            const auto z = static_cast<int>((s / detail::int_pow(static_cast<std::size_t>(Z), horizon - 1 - t)) %
                                                            static_cast<std::size_t>(Z));
                            const int x1 = f1[static_cast<std::size_t>(t)][static_cast<std::size_t>(w1) * scale + hist];
                            const int x2 = f2[static_cast<std::size_t>(t)][static_cast<std::size_t>(w2) * scale + hist];
                            p *= Q(x1, x2, z);
                            if (p == Scalar(0)) break;
                            hist = hist * static_cast<std::size_t>(Z) + static_cast<std::size_t>(z);
                            scale *= static_cast<std::size_t>(Z);
                        }
                        if (p > best_joint[s]) best_joint[s] = p;
                    }
            Scalar correct(0);
            for (const auto& v : best_joint) correct += v;
            const Scalar pe = Scalar(1) - correct;
            if (!have_best || pe < result.min_error) {
                have_best = true;
                result.min_error = pe;
                result.witness = {f1, f2};
            }
        }
    }
    return result;
}

namespace detail {

template <typename Scalar>
Scalar exact_dp_recurse(const std::vector<Scalar>& alpha, int depth, int horizon, const ProblemSpec& spec,
                        const std::vector<Scalar>& q, const std::vector<JointAction>& actions) {
    if (depth == horizon) {
        Scalar total(0);
        Scalar best(0);
        for (const auto& a : alpha) {
            total += a;
            if (a > best) best = a;
        }
        return total - best;
    }
    const int Z = spec.z_size;
    bool have = false;
    Scalar best(0);
    std::vector<Scalar> next(alpha.size());
    for (const auto& action : actions) {
        Scalar v(0);
        for (int z = 0; z < Z; ++z) {
            bool any = false;
            for (int w1 = 0; w1 < spec.m1; ++w1)
                for (int w2 = 0; w2 < spec.m2; ++w2) {
                    const auto k = static_cast<std::size_t>(w1 * spec.m2 + w2);
                    next[k] = alpha[k] * q[static_cast<std::size_t>((action.e1(w1) * spec.x2_size + action.e2(w2)) * Z + z)];
                    any = any || next[k] != Scalar(0);
                }
            if (any) v += exact_dp_recurse(next, depth + 1, horizon, spec, q, actions);
        }
        if (!have || v < best) {
            have = true;
            best = v;
        }
    }
    return best;
}

}  // namespace detail

/// Structured-strategy optimum by exhaustive recursion over unnormalized
/// beliefs alpha(w) = P(w, z_{1:t}); no memoization, no division.
template <typename Scalar>
Scalar exact_dp_value(const ProblemSpec& spec, const Channel& ch, int horizon) {
    spec.validate();
    const auto actions = ActionSpace(spec).all();
    const auto q = detail::scalar_table<Scalar>(ch);
    std::vector<Scalar> alpha(static_cast<std::size_t>(spec.pairs()), Scalar(1) / Scalar(spec.pairs()));
    return detail::exact_dp_recurse(alpha, 0, horizon, spec, q, actions);
}

/// Distinct reachable beliefs per depth, deduplicated by exact equality.
template <typename Scalar>
std::vector<std::size_t> count_reachable_exact(const ProblemSpec& spec, const Channel& ch, int horizon) {
    spec.validate();
    const auto actions = ActionSpace(spec).all();
    const int Z = spec.z_size;
    const auto q = detail::scalar_table<Scalar>(ch);

    std::set<std::vector<Scalar>> level{std::vector<Scalar>(static_cast<std::size_t>(spec.pairs()),
                                                            Scalar(1) / Scalar(spec.pairs()))};
    std::vector<std::size_t> counts{level.size()};
    for (int t = 0; t < horizon; ++t) {
        std::set<std::vector<Scalar>> next_level;
        for (const auto& pi : level)
            for (const auto& action : actions)
                for (int z = 0; z < Z; ++z) {
                    std::vector<Scalar> next(pi.size());
                    Scalar total(0);
                    for (int w1 = 0; w1 < spec.m1; ++w1)
                        for (int w2 = 0; w2 < spec.m2; ++w2) {
                            const auto k = static_cast<std::size_t>(w1 * spec.m2 + w2);
                            next[k] = pi[k] * q[static_cast<std::size_t>((action.e1(w1) * spec.x2_size + action.e2(w2)) * Z + z)];
                            total += next[k];
                        }
                    if (total == Scalar(0)) continue;
                    for (auto& v : next) v /= total;
                    next_level.insert(std::move(next));
                }
        level = std::move(next_level);
        counts.push_back(level.size());
    }
    return counts;
}

}  // namespace dsaht
