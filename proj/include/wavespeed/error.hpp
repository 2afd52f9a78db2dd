#pragma once

#include <stdexcept>
#include <string>

namespace wavespeed {

/// Failure categories. The CLI maps the first group to exit code 2 and the
/// numerical group to exit code 3.
enum class ErrorCode {
    // argument / domain
    InvalidArgument,
    UnsupportedVariant,
    Io,
    // numerical
    Overflow,
    BracketInvalid,
    BracketExpansion,
    NoConvergence,
    NoPositiveRoot,
    DegenerateCubic,
    ComplexRoots,
    Instability,
};

const char* to_string(ErrorCode code) noexcept;

/// True for codes that describe bad input rather than a numerical failure.
constexpr bool is_argument_error(ErrorCode code) noexcept {
    return code == ErrorCode::InvalidArgument ||
           code == ErrorCode::UnsupportedVariant ||
           code == ErrorCode::Io;
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace wavespeed
