#pragma once

#include <stdexcept>
#include <string>

namespace dsaht {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    NotStochastic,
    NegativeEntry,
    ZeroProbabilityObservation,
    ZeroProbabilityInput,
    BudgetExceeded,
    IncompletePolicy,
    NotConverged,
    NegativeInformation,
};

const char* to_string(ErrorCode code) noexcept;

/// Every failure raised by the library carries one of the codes above so the
/// C layer can map it to a status without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace dsaht
