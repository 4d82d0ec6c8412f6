#pragma once

#include <vector>

#include "dsaht/channels.hpp"
#include "dsaht/errors.hpp"
#include "dsaht/model.hpp"

namespace dsaht::test {

inline ProblemSpec binary_spec(int z_size = 2) { return ProblemSpec{2, 2, z_size, 2, 2, LogBase::Bits}; }

inline JointAction action(std::vector<int> e1, std::vector<int> e2) {
    return JointAction{EncoderFunction{User::One, std::move(e1)}, EncoderFunction{User::Two, std::move(e2)}};
}

inline ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return static_cast<ErrorCode>(-1);
}

}  // namespace dsaht::test
