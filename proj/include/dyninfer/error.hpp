#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dyninfer {

enum class ErrorKind {
    DimensionMismatch,
    NotStochastic,
    HorizonMismatch,
    UnknownLabel,
    RoundOutOfRange,
    MismatchedResult,
    ShapeMismatch,
    HistoryIncomplete,
    SearchSpaceTooLarge,
    InvalidParams,
    ParseError,
};

inline std::string_view to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::NotStochastic: return "NotStochastic";
    case ErrorKind::HorizonMismatch: return "HorizonMismatch";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::RoundOutOfRange: return "RoundOutOfRange";
    case ErrorKind::MismatchedResult: return "MismatchedResult";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::HistoryIncomplete: return "HistoryIncomplete";
    case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::ParseError: return "ParseError";
    }
    return "Unknown";
}

/// Domain error raised by every library operation. The kind is stable and
/// machine-readable; the message is for humans.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace dyninfer
