#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsaht/errors.hpp"

namespace dsaht {

enum class LogBase { Bits, Nats };

enum class User { One = 1, Two = 2 };

/// Alphabet and message-set sizes of a two-user multiple access problem.
/// Messages are indexed 0..m-1 and symbols 0..size-1 throughout.
struct ProblemSpec {
    int x1_size = 2;
    int x2_size = 2;
    int z_size = 2;
    int m1 = 2;
    int m2 = 2;
    LogBase log_base = LogBase::Bits;

    int pairs() const { return m1 * m2; }
    int messages(User u) const { return u == User::One ? m1 : m2; }
    int inputs(User u) const { return u == User::One ? x1_size : x2_size; }

    /// Throws InvalidArgument on non-positive sizes or a single message pair.
    void validate() const;
};

bool operator==(const ProblemSpec& a, const ProblemSpec& b);

/// Row-stochastic table Q(z | x1, x2), rows ordered row-major by (x1, x2).
class Channel {
public:
    Channel() = default;

    int x1_size() const { return x1_size_; }
    int x2_size() const { return x2_size_; }
    int z_size() const { return z_size_; }

    double operator()(int x1, int x2, int z) const {
        return q_[static_cast<std::size_t>((x1 * x2_size_ + x2) * z_size_ + z)];
    }

    std::span<const double> row(int x1, int x2) const {
        return {q_.data() + static_cast<std::size_t>((x1 * x2_size_ + x2) * z_size_),
                static_cast<std::size_t>(z_size_)};
    }

    std::span<const double> table() const { return q_; }

    /// Channel whose output z is relabelled perm[z].
    Channel permute_outputs(std::span<const int> perm) const;

private:
    friend Channel validate_channel(const ProblemSpec&, std::span<const double>);

    int x1_size_ = 0;
    int x2_size_ = 0;
    int z_size_ = 0;
    std::vector<double> q_;
};

/// Checks dimensions, signs and row sums (tolerance 1e-9) and renormalizes
/// each row so it sums to one to machine precision.
Channel validate_channel(const ProblemSpec& spec, std::span<const double> q_raw);

/// Canonical rounded form of a probability vector, used to key memo tables.
using BeliefKey = std::vector<std::int64_t>;

struct BeliefKeyHash {
    std::size_t operator()(const BeliefKey& key) const noexcept;
};

/// Snap entries below 1e-15 to zero, renormalize, round to 12 decimals.
BeliefKey canonical_key(std::span<const double> p);

/// Posterior over message pairs, stored row-major by (w1, w2).
class JointBelief {
public:
    JointBelief() = default;
    JointBelief(int m1, int m2, std::vector<double> p);

    static JointBelief uniform(int m1, int m2);
    static JointBelief point_mass(int m1, int m2, int w1, int w2);
    /// Normalizes non-negative weights; throws ZeroProbabilityObservation when
    /// they sum to (numerically) zero.
    static JointBelief from_weights(int m1, int m2, std::vector<double> w);

    int m1() const { return m1_; }
    int m2() const { return m2_; }
    double operator()(int w1, int w2) const { return p_[static_cast<std::size_t>(w1 * m2_ + w2)]; }
    std::span<const double> values() const { return p_; }

    double marginal1(int w1) const;
    double marginal2(int w2) const;

    BeliefKey key() const { return canonical_key(p_); }

private:
    int m1_ = 0;
    int m2_ = 0;
    std::vector<double> p_;
};

/// User i's belief on its own message given its inputs and the feedback.
class PrivateBelief {
public:
    PrivateBelief() = default;
    PrivateBelief(User user, std::vector<double> p);

    static PrivateBelief uniform(User user, int m);

    User user() const { return user_; }
    int size() const { return static_cast<int>(p_.size()); }
    double operator()(int w) const { return p_[static_cast<std::size_t>(w)]; }
    std::span<const double> values() const { return p_; }

    BeliefKey key() const { return canonical_key(p_); }

private:
    User user_ = User::One;
    std::vector<double> p_;
};

/// A map from user i's messages to its input symbols.
struct EncoderFunction {
    User user = User::One;
    std::vector<int> map;

    int operator()(int w) const { return map[static_cast<std::size_t>(w)]; }
    void validate(const ProblemSpec& spec) const;
};

bool operator==(const EncoderFunction& a, const EncoderFunction& b);

struct JointAction {
    EncoderFunction e1{User::One, {}};
    EncoderFunction e2{User::Two, {}};

    void validate(const ProblemSpec& spec) const;
};

bool operator==(const JointAction& a, const JointAction& b);

/// Enumerates encoder functions as base-|X| numerals of their value sequences
/// (first message most significant) and joint actions row-major by (e1, e2).
class ActionSpace {
public:
    explicit ActionSpace(const ProblemSpec& spec);

    std::size_t encoder_count(User u) const { return u == User::One ? count1_ : count2_; }
    std::size_t size() const { return count1_ * count2_; }

    EncoderFunction encoder(User u, std::size_t index) const;
    std::size_t encoder_index(const EncoderFunction& e) const;

    JointAction action(std::size_t index) const;
    std::size_t index(const JointAction& a) const;

    std::vector<JointAction> all() const;

private:
    ProblemSpec spec_;
    std::size_t count1_ = 0;
    std::size_t count2_ = 0;
};

struct MessagePair {
    int w1 = 0;
    int w2 = 0;
    friend bool operator==(const MessagePair&, const MessagePair&) = default;
};

/// Q(z | e1(w1), e2(w2)).
inline double pair_likelihood(const Channel& ch, const JointAction& e, int w1, int w2, int z) {
    return ch(e.e1(w1), e.e2(w2), z);
}

/// P(z | pi, e) for every output symbol.
std::vector<double> output_distribution(const JointBelief& pi, const JointAction& e, const Channel& ch);

/// P(x1, x2 | pi, e), row-major by (x1, x2).
std::vector<double> input_pair_distribution(const JointBelief& pi, const JointAction& e, const Channel& ch);

/// Bayes update of the common belief after action e produced output z.
JointBelief belief_update(const JointBelief& pi, const JointAction& e, int z, const Channel& ch);

/// Restricts user i's belief to the preimage of the input it sent.
PrivateBelief private_belief_update(const PrivateBelief& pihat, const EncoderFunction& e, int x);

/// P(x | pihat, e) over user i's input alphabet of size input_size.
std::vector<double> induced_input_marginal(const PrivateBelief& pihat, const EncoderFunction& e,
                                           int input_size);

/// Lexicographically smallest maximizer.
MessagePair ml_decode(const JointBelief& pi);

/// 1 - max pi.
double terminal_cost(const JointBelief& pi);

std::string to_string(LogBase base);
LogBase parse_log_base(const std::string& text);

}  // namespace dsaht
