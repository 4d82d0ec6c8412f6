#pragma once

#include <cstdint>
#include <string>

#include "dsaht/model.hpp"

namespace dsaht {

/// Every row uniform over Z.
Channel uniform_channel(const ProblemSpec& spec);

/// Z = (X1, X2) encoded as z = x1 * |X2| + x2. Requires |Z| = |X1||X2|.
Channel identity_pair_channel(const ProblemSpec& spec);

/// Binary alphabets; Z = X1 xor X2 flipped with probability p.
Channel xor_bsc_channel(const ProblemSpec& spec, double p);

/// Rows drawn uniformly from the probability simplex (flat Dirichlet),
/// reproducible across platforms for a given seed.
Channel random_channel(const ProblemSpec& spec, std::uint64_t seed);

/// Named generators: "uniform", "identity-pair", "xor-bsc(p)", "random(seed)".
Channel make_channel(const ProblemSpec& spec, const std::string& generator);

/// Uniform double in [0, 1) built from the top 53 bits of a 64-bit word.
inline double unit_interval(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// SplitMix64 finalizer; used to derive independent per-trial seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace dsaht
