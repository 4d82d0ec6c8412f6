#include "dsaht/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace dsaht {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::NotStochastic: return "NotStochastic";
        case ErrorCode::NegativeEntry: return "NegativeEntry";
        case ErrorCode::ZeroProbabilityObservation: return "ZeroProbabilityObservation";
        case ErrorCode::ZeroProbabilityInput: return "ZeroProbabilityInput";
        case ErrorCode::BudgetExceeded: return "BudgetExceeded";
        case ErrorCode::IncompletePolicy: return "IncompletePolicy";
        case ErrorCode::NotConverged: return "NotConverged";
        case ErrorCode::NegativeInformation: return "NegativeInformation";
    }
    return "Unknown";
}

namespace {

constexpr double kSnap = 1e-15;
constexpr double kKeyScale = 1e12;
constexpr double kNormTol = 1e-9;

void check_distribution(std::span<const double> p, const char* what) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) fail(ErrorCode::NegativeEntry, std::string(what) + " has a negative entry");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kNormTol)
        fail(ErrorCode::InvalidArgument, std::string(what) + " does not sum to one");
}

void renormalize(std::vector<double>& p) {
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    for (double& v : p) v /= sum;
}

}  // namespace

void ProblemSpec::validate() const {
    if (x1_size < 1 || x2_size < 1 || z_size < 1 || m1 < 1 || m2 < 1)
        fail(ErrorCode::InvalidArgument, "alphabet and message sizes must be positive");
    if (m1 * m2 < 2) fail(ErrorCode::InvalidArgument, "need at least two message pairs");
}

bool operator==(const ProblemSpec& a, const ProblemSpec& b) {
    return a.x1_size == b.x1_size && a.x2_size == b.x2_size && a.z_size == b.z_size && a.m1 == b.m1 &&
           a.m2 == b.m2 && a.log_base == b.log_base;
}

Channel validate_channel(const ProblemSpec& spec, std::span<const double> q_raw) {
    const auto rows = static_cast<std::size_t>(spec.x1_size * spec.x2_size);
    const auto cols = static_cast<std::size_t>(spec.z_size);
    if (q_raw.size() != rows * cols)
        fail(ErrorCode::DimensionMismatch, "channel table has " + std::to_string(q_raw.size()) +
                                               " entries, expected " + std::to_string(rows * cols));
    Channel ch;
    ch.x1_size_ = spec.x1_size;
    ch.x2_size_ = spec.x2_size;
    ch.z_size_ = spec.z_size;
    ch.q_.assign(q_raw.begin(), q_raw.end());
    for (std::size_t r = 0; r < rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double v = ch.q_[r * cols + c];
            if (std::isnan(v)) fail(ErrorCode::NotStochastic, "channel entry is NaN");
            if (v < 0.0)
                fail(ErrorCode::NegativeEntry, "channel row " + std::to_string(r) + " has a negative entry");
            sum += v;
        }
        if (std::abs(sum - 1.0) > kNormTol)
            fail(ErrorCode::NotStochastic,
                 "channel row " + std::to_string(r) + " sums to " + std::to_string(sum));
        for (std::size_t c = 0; c < cols; ++c) ch.q_[r * cols + c] /= sum;
    }
    return ch;
}

Channel Channel::permute_outputs(std::span<const int> perm) const {
    if (perm.size() != static_cast<std::size_t>(z_size_))
        fail(ErrorCode::DimensionMismatch, "output permutation has the wrong length");
    Channel out = *this;
    for (int x1 = 0; x1 < x1_size_; ++x1)
        for (int x2 = 0; x2 < x2_size_; ++x2)
            for (int z = 0; z < z_size_; ++z)
                out.q_[static_cast<std::size_t>((x1 * x2_size_ + x2) * z_size_ + perm[static_cast<std::size_t>(z)])] =
                    (*this)(x1, x2, z);
    return out;
}

std::size_t BeliefKeyHash::operator()(const BeliefKey& key) const noexcept {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (auto v : key) {
        h ^= static_cast<std::size_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

BeliefKey canonical_key(std::span<const double> p) {
    std::vector<double> snapped(p.begin(), p.end());
    double sum = 0.0;
    for (double& v : snapped) {
        if (v < kSnap) v = 0.0;
        sum += v;
    }
    BeliefKey key(snapped.size());
    for (std::size_t i = 0; i < snapped.size(); ++i)
        key[i] = std::llround(snapped[i] / sum * kKeyScale);
    return key;
}

JointBelief::JointBelief(int m1, int m2, std::vector<double> p) : m1_(m1), m2_(m2), p_(std::move(p)) {
    if (m1 < 1 || m2 < 1 || p_.size() != static_cast<std::size_t>(m1 * m2))
        fail(ErrorCode::DimensionMismatch, "joint belief has the wrong size");
    check_distribution(p_, "joint belief");
    renormalize(p_);
}

JointBelief JointBelief::uniform(int m1, int m2) {
    const auto n = static_cast<std::size_t>(m1 * m2);
    return JointBelief(m1, m2, std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

JointBelief JointBelief::point_mass(int m1, int m2, int w1, int w2) {
    std::vector<double> p(static_cast<std::size_t>(m1 * m2), 0.0);
    p[static_cast<std::size_t>(w1 * m2 + w2)] = 1.0;
    return JointBelief(m1, m2, std::move(p));
}

JointBelief JointBelief::from_weights(int m1, int m2, std::vector<double> w) {
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    if (!(sum > 1e-300)) fail(ErrorCode::ZeroProbabilityObservation, "conditioning on a zero-probability event");
    JointBelief b;
    b.m1_ = m1;
    b.m2_ = m2;
    for (double& v : w) v /= sum;
    b.p_ = std::move(w);
    return b;
}

double JointBelief::marginal1(int w1) const {
    double s = 0.0;
    for (int w2 = 0; w2 < m2_; ++w2) s += (*this)(w1, w2);
    return s;
}

double JointBelief::marginal2(int w2) const {
    double s = 0.0;
    for (int w1 = 0; w1 < m1_; ++w1) s += (*this)(w1, w2);
    return s;
}

PrivateBelief::PrivateBelief(User user, std::vector<double> p) : user_(user), p_(std::move(p)) {
    if (p_.empty()) fail(ErrorCode::DimensionMismatch, "private belief is empty");
    check_distribution(p_, "private belief");
    renormalize(p_);
}

PrivateBelief PrivateBelief::uniform(User user, int m) {
    return PrivateBelief(user, std::vector<double>(static_cast<std::size_t>(m), 1.0 / m));
}

void EncoderFunction::validate(const ProblemSpec& spec) const {
    if (map.size() != static_cast<std::size_t>(spec.messages(user)))
        fail(ErrorCode::DimensionMismatch, "encoder function length differs from the message count");
    for (int x : map)
        if (x < 0 || x >= spec.inputs(user))
            fail(ErrorCode::InvalidArgument, "encoder function maps to an invalid input symbol");
}

bool operator==(const EncoderFunction& a, const EncoderFunction& b) {
    return a.user == b.user && a.map == b.map;
}

void JointAction::validate(const ProblemSpec& spec) const {
    if (e1.user != User::One || e2.user != User::Two)
        fail(ErrorCode::InvalidArgument, "joint action user tags do not match their positions");
    e1.validate(spec);
    e2.validate(spec);
}

bool operator==(const JointAction& a, const JointAction& b) { return a.e1 == b.e1 && a.e2 == b.e2; }

namespace {

std::size_t checked_power(int base, int exp) {
    std::size_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (r > std::numeric_limits<std::uint32_t>::max() / static_cast<std::size_t>(base))
            fail(ErrorCode::BudgetExceeded, "encoder function space is too large to enumerate");
        r *= static_cast<std::size_t>(base);
    }
    return r;
}

}  // namespace

ActionSpace::ActionSpace(const ProblemSpec& spec) : spec_(spec) {
    spec.validate();
    count1_ = checked_power(spec.x1_size, spec.m1);
    count2_ = checked_power(spec.x2_size, spec.m2);
    if (count1_ > std::numeric_limits<std::uint32_t>::max() / count2_)
        fail(ErrorCode::BudgetExceeded, "joint action space is too large to enumerate");
}

EncoderFunction ActionSpace::encoder(User u, std::size_t index) const {
    const int m = spec_.messages(u);
    const auto base = static_cast<std::size_t>(spec_.inputs(u));
    if (index >= encoder_count(u)) fail(ErrorCode::InvalidArgument, "encoder index out of range");
    EncoderFunction e{u, std::vector<int>(static_cast<std::size_t>(m))};
    for (int w = m - 1; w >= 0; --w) {
        e.map[static_cast<std::size_t>(w)] = static_cast<int>(index % base);
        index /= base;
    }
    return e;
}

std::size_t ActionSpace::encoder_index(const EncoderFunction& e) const {
    e.validate(spec_);
    const auto base = static_cast<std::size_t>(spec_.inputs(e.user));
    std::size_t index = 0;
    for (int x : e.map) index = index * base + static_cast<std::size_t>(x);
    return index;
}

JointAction ActionSpace::action(std::size_t index) const {
    if (index >= size()) fail(ErrorCode::InvalidArgument, "joint action index out of range");
    return JointAction{encoder(User::One, index / count2_), encoder(User::Two, index % count2_)};
}

std::size_t ActionSpace::index(const JointAction& a) const {
    return encoder_index(a.e1) * count2_ + encoder_index(a.e2);
}

std::vector<JointAction> ActionSpace::all() const {
    std::vector<JointAction> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(action(i));
    return out;
}

std::vector<double> output_distribution(const JointBelief& pi, const JointAction& e, const Channel& ch) {
    std::vector<double> pz(static_cast<std::size_t>(ch.z_size()), 0.0);
    for (int w1 = 0; w1 < pi.m1(); ++w1)
        for (int w2 = 0; w2 < pi.m2(); ++w2) {
            const double p = pi(w1, w2);
            if (p == 0.0) continue;
            const auto row = ch.row(e.e1(w1), e.e2(w2));
            for (std::size_t z = 0; z < row.size(); ++z) pz[z] += row[z] * p;
        }
    return pz;
}

std::vector<double> input_pair_distribution(const JointBelief& pi, const JointAction& e, const Channel& ch) {
    std::vector<double> px(static_cast<std::size_t>(ch.x1_size() * ch.x2_size()), 0.0);
    for (int w1 = 0; w1 < pi.m1(); ++w1)
        for (int w2 = 0; w2 < pi.m2(); ++w2)
            px[static_cast<std::size_t>(e.e1(w1) * ch.x2_size() + e.e2(w2))] += pi(w1, w2);
    return px;
}

JointBelief belief_update(const JointBelief& pi, const JointAction& e, int z, const Channel& ch) {
    if (z < 0 || z >= ch.z_size()) fail(ErrorCode::InvalidArgument, "output symbol out of range");
    std::vector<double> w(pi.values().size());
    for (int w1 = 0; w1 < pi.m1(); ++w1)
        for (int w2 = 0; w2 < pi.m2(); ++w2)
            w[static_cast<std::size_t>(w1 * pi.m2() + w2)] = pair_likelihood(ch, e, w1, w2, z) * pi(w1, w2);
    return JointBelief::from_weights(pi.m1(), pi.m2(), std::move(w));
}

PrivateBelief private_belief_update(const PrivateBelief& pihat, const EncoderFunction& e, int x) {
    if (e.map.size() != static_cast<std::size_t>(pihat.size()))
        fail(ErrorCode::DimensionMismatch, "encoder and private belief sizes differ");
    std::vector<double> p(static_cast<std::size_t>(pihat.size()), 0.0);
    double mass = 0.0;
    for (int w = 0; w < pihat.size(); ++w)
        if (e(w) == x) {
            p[static_cast<std::size_t>(w)] = pihat(w);
            mass += pihat(w);
        }
    if (!(mass > 0.0)) fail(ErrorCode::ZeroProbabilityInput, "input symbol is not reachable under the belief");
    for (double& v : p) v /= mass;
    return PrivateBelief(pihat.user(), std::move(p));
}

std::vector<double> induced_input_marginal(const PrivateBelief& pihat, const EncoderFunction& e,
                                           int input_size) {
    if (e.map.size() != static_cast<std::size_t>(pihat.size()))
        fail(ErrorCode::DimensionMismatch, "encoder and private belief sizes differ");
    std::vector<double> px(static_cast<std::size_t>(input_size), 0.0);
    for (int w = 0; w < pihat.size(); ++w) {
        const int x = e(w);
        if (x < 0 || x >= input_size) fail(ErrorCode::InvalidArgument, "encoder output out of range");
        px[static_cast<std::size_t>(x)] += pihat(w);
    }
    return px;
}

MessagePair ml_decode(const JointBelief& pi) {
    const auto p = pi.values();
    const auto best = std::max_element(p.begin(), p.end());  // first maximizer
    const auto idx = static_cast<int>(best - p.begin());
    return {idx / pi.m2(), idx % pi.m2()};
}

double terminal_cost(const JointBelief& pi) {
    const auto p = pi.values();
    return 1.0 - *std::max_element(p.begin(), p.end());
}

std::string to_string(LogBase base) { return base == LogBase::Bits ? "bits" : "nats"; }

LogBase parse_log_base(const std::string& text) {
    if (text == "bits") return LogBase::Bits;
    if (text == "nats") return LogBase::Nats;
    fail(ErrorCode::InvalidArgument, "log base must be 'bits' or 'nats', got '" + text + "'");
}

}  // namespace dsaht
