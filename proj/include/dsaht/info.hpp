#pragma once

#include <cmath>
#include <span>

#include "dsaht/model.hpp"

namespace dsaht {

/// Probabilities below this are treated as zero inside logarithms.
inline constexpr double kLogFloor = 1e-300;

inline double log_in(double x, LogBase base) {
    return base == LogBase::Bits ? std::log2(x) : std::log(x);
}

/// -p log p with 0 log 0 = 0.
inline double neg_plogp(double p, LogBase base) {
    return p < kLogFloor ? 0.0 : -p * log_in(p, base);
}

inline double entropy(std::span<const double> p, LogBase base) {
    double h = 0.0;
    for (double v : p) h += neg_plogp(v, base);
    return h;
}

/// Binary entropy function.
inline double binary_entropy(double p, LogBase base = LogBase::Bits) {
    return neg_plogp(p, base) + neg_plogp(1.0 - p, base);
}

}  // namespace dsaht
