#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace retarget {

enum class ErrorCode {
    InvalidInput,
    DegenerateGeometry,
    ExtremalPrecondition,
    SolverFailure,
    Foldover,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::DegenerateGeometry: return "degenerate_geometry";
    case ErrorCode::ExtremalPrecondition: return "extremal_precondition";
    case ErrorCode::SolverFailure: return "solver_failure";
    case ErrorCode::Foldover: return "foldover";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message)
        , code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Raised when a warped face ends up with non-positive signed area.
class FoldoverError : public Error {
public:
    FoldoverError(const std::string& message, std::vector<std::size_t> faces)
        : Error(ErrorCode::Foldover, message)
        , faces_(std::move(faces))
    {
    }

    const std::vector<std::size_t>& faces() const noexcept { return faces_; }

private:
    std::vector<std::size_t> faces_;
};

} // namespace retarget
