#include "dsaht/channels.hpp"

#include <cmath>
#include <random>
#include <regex>
#include <vector>

namespace dsaht {

Channel uniform_channel(const ProblemSpec& spec) {
    spec.validate();
    std::vector<double> q(static_cast<std::size_t>(spec.x1_size * spec.x2_size * spec.z_size),
                          1.0 / spec.z_size);
    return validate_channel(spec, q);
}

Channel identity_pair_channel(const ProblemSpec& spec) {
    spec.validate();
    if (spec.z_size != spec.x1_size * spec.x2_size)
        fail(ErrorCode::DimensionMismatch, "identity-pair channel needs |Z| = |X1||X2|");
    std::vector<double> q(static_cast<std::size_t>(spec.x1_size * spec.x2_size * spec.z_size), 0.0);
    for (int x1 = 0; x1 < spec.x1_size; ++x1)
        for (int x2 = 0; x2 < spec.x2_size; ++x2) {
            const int z = x1 * spec.x2_size + x2;
            q[static_cast<std::size_t>((x1 * spec.x2_size + x2) * spec.z_size + z)] = 1.0;
        }
    return validate_channel(spec, q);
}

Channel xor_bsc_channel(const ProblemSpec& spec, double p) {
    spec.validate();
    if (spec.x1_size != 2 || spec.x2_size != 2 || spec.z_size != 2)
        fail(ErrorCode::DimensionMismatch, "xor-bsc needs binary input and output alphabets");
    if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "crossover probability must lie in [0, 1]");
    std::vector<double> q(8);
    for (int x1 = 0; x1 < 2; ++x1)
        for (int x2 = 0; x2 < 2; ++x2)
            for (int z = 0; z < 2; ++z)
                q[static_cast<std::size_t>((x1 * 2 + x2) * 2 + z)] = (z == (x1 ^ x2)) ? 1.0 - p : p;
    return validate_channel(spec, q);
}

Channel random_channel(const ProblemSpec& spec, std::uint64_t seed) {
    spec.validate();
    std::mt19937_64 rng(seed);
    const int rows = spec.x1_size * spec.x2_size;
    std::vector<double> q;
    q.reserve(static_cast<std::size_t>(rows * spec.z_size));
    for (int r = 0; r < rows; ++r) {
        std::vector<double> row(static_cast<std::size_t>(spec.z_size));
        double sum = 0.0;
        for (double& v : row) {
            // exponential draws normalize to a flat Dirichlet sample
            v = -std::log1p(-unit_interval(rng()));
            sum += v;
        }
        for (double v : row) q.push_back(v / sum);
    }
    return validate_channel(spec, q);
}

Channel make_channel(const ProblemSpec& spec, const std::string& generator) {
    static const std::regex xor_re(R"(^\s*xor-bsc\(\s*([0-9eE+.\-]+)\s*\)\s*$)");
    static const std::regex random_re(R"(^\s*random\(\s*([0-9]+)\s*\)\s*$)");
    std::smatch m;
    if (generator == "uniform") return uniform_channel(spec);
    if (generator == "identity-pair") return identity_pair_channel(spec);
    if (std::regex_match(generator, m, xor_re)) return xor_bsc_channel(spec, std::stod(m[1].str()));
    if (std::regex_match(generator, m, random_re)) return random_channel(spec, std::stoull(m[1].str()));
    fail(ErrorCode::InvalidArgument, "unknown channel generator '" + generator + "'");
}

}  // namespace dsaht
