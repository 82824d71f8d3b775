#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace alto {

enum class ErrorKind {
    usage,
    cross_device,
    stream_integrity,
    format,
    internal_inconsistency,
    infeasible_observation,
    degenerate_hyperbola,
    no_intersection,
    box_too_small,
    singular_fit,
    config,
    io,
};

inline constexpr std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::cross_device: return "cross-device";
        case ErrorKind::stream_integrity: return "stream-integrity";
        case ErrorKind::format: return "format";
        case ErrorKind::internal_inconsistency: return "internal-inconsistency";
        case ErrorKind::infeasible_observation: return "infeasible-observation";
        case ErrorKind::degenerate_hyperbola: return "degenerate-hyperbola";
        case ErrorKind::no_intersection: return "no-intersection";
        case ErrorKind::box_too_small: return "box-too-small";
        case ErrorKind::singular_fit: return "singular-fit";
        case ErrorKind::config: return "config";
        case ErrorKind::io: return "io";
    }
    return "unknown";
}

/// Every failure raised by the library carries a kind so callers (and tests)
/// can branch on the category without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace alto
