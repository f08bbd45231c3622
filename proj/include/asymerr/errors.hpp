#pragma once

#include <stdexcept>
#include <string>

namespace asymerr {

enum class ErrorCode {
    InvalidArgument,
    Domain,
    NoSignChange,
    NonConvergent,
    Degenerate,
    UnrepresentableAsymmetry,
    UnrepresentableSkewness,
    OutOfDomain,
    NoCrossing,
    NoMaximum,
    DomainExhausted,
    MixedFamilies,
};

const char* error_code_name(ErrorCode code);

// Typed failure. The CLI maps code() onto its exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& where, const std::string& what);

} // namespace asymerr
