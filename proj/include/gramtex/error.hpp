#pragma once

#include <stdexcept>
#include <string>

namespace gramtex {

enum class ErrorCode {
    invalid_argument,
    size_mismatch,
    channel_mismatch,
    shape_mismatch,
    non_convergence,
    non_finite_energy,
    singular_circulant,
    construction_failed,
    block_not_diagonal,
    alignment_ambiguous,
    singular_system,
    io_error,
};

inline const char* to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::size_mismatch: return "SizeMismatch";
    case ErrorCode::channel_mismatch: return "ChannelMismatch";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::non_convergence: return "NonConvergence";
    case ErrorCode::non_finite_energy: return "NonFiniteEnergy";
    case ErrorCode::singular_circulant: return "SingularCirculant";
    case ErrorCode::construction_failed: return "ConstructionFailed";
    case ErrorCode::block_not_diagonal: return "BlockNotDiagonal";
    case ErrorCode::alignment_ambiguous: return "AlignmentAmbiguous";
    case ErrorCode::singular_system: return "SingularSystem";
    case ErrorCode::io_error: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what)
{
    if (!condition)
        throw Error(code, what);
}

} // namespace gramtex
