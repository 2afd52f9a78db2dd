#include "wavespeed/error.hpp"

namespace wavespeed {

const char* to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid-argument";
        case ErrorCode::UnsupportedVariant: return "unsupported-variant";
        case ErrorCode::Io: return "io";
        case ErrorCode::Overflow: return "overflow";
        case ErrorCode::BracketInvalid: return "bracket-invalid";
        case ErrorCode::BracketExpansion: return "bracket-expansion";
        case ErrorCode::NoConvergence: return "no-convergence";
        case ErrorCode::NoPositiveRoot: return "no-positive-root";
        case ErrorCode::DegenerateCubic: return "degenerate-leading-coefficient";
        case ErrorCode::ComplexRoots: return "complex-roots";
        case ErrorCode::Instability: return "instability";
    }
    return "unknown";
}

}  // namespace wavespeed
