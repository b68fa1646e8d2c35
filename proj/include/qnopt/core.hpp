#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qnopt {

using Vector = std::vector<double>;

enum class ErrorCode {
    UnknownProblem,
    IncompatibleDimension,
    DimensionMismatch,
    NonFiniteValue,
    NotDescent,
    SearchFailed,
    ZeroStep,
    InvalidConfig,
    InvalidDimensions,
    ZeroReference,
    ParseError,
    TooShort,
    DomainError,
    EmptyGrid,
    UnknownSolver,
    NoSolvedProblems,
    IoError,
    InvariantViolation,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::UnknownProblem: return "UnknownProblem";
    case ErrorCode::IncompatibleDimension: return "IncompatibleDimension";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NotDescent: return "NotDescent";
    case ErrorCode::SearchFailed: return "SearchFailed";
    case ErrorCode::ZeroStep: return "ZeroStep";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidDimensions: return "InvalidDimensions";
    case ErrorCode::ZeroReference: return "ZeroReference";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::UnknownSolver: return "UnknownSolver";
    case ErrorCode::NoSolvedProblems: return "NoSolvedProblems";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    }
    return "Unknown";
}

/// Exception type for every recoverable failure raised by the library.
/// The message is prefixed with the error code name.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

namespace detail {

inline void require_same_size(std::size_t a, std::size_t b, const char *where) {
    if (a != b)
        throw Error(ErrorCode::DimensionMismatch,
                    std::string(where) + ": length " + std::to_string(a) + " vs " + std::to_string(b));
}

// Solver-internal contract checks; compiled in for test builds only.
#ifdef QNOPT_CHECK_INVARIANTS
inline constexpr bool check_invariants = true;
#else
inline constexpr bool check_invariants = false;
#endif

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

inline void invariant(bool ok, const char *what) {
    if constexpr (check_invariants) {
        if (!ok)
            throw Error(ErrorCode::InvariantViolation, what);
    }
}

} // namespace detail

inline double dot(std::span<const double> a, std::span<const double> b) {
    detail::require_same_size(a.size(), b.size(), "dot");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        sum += a[i] * b[i];
    return sum;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a) {
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::abs(v));
    return m;
}

// out = x + alpha * d
inline Vector axpy(std::span<const double> x, double alpha, std::span<const double> d) {
    detail::require_same_size(x.size(), d.size(), "axpy");
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + alpha * d[i];
    return out;
}

inline Vector difference(std::span<const double> a, std::span<const double> b) {
    detail::require_same_size(a.size(), b.size(), "difference");
    Vector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = a[i] - b[i];
    return out;
}

inline bool all_finite(std::span<const double> a) {
    for (double v : a)
        if (!std::isfinite(v))
            return false;
    return true;
}

} // namespace qnopt
