#include <chebprop/error.hpp>

namespace chebprop {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::shape: return "shape";
        case ErrorCode::aliasing: return "aliasing";
        case ErrorCode::out_of_range: return "out-of-range";
        case ErrorCode::domain: return "domain";
        case ErrorCode::hermiticity: return "hermiticity";
        case ErrorCode::amplitude_bound: return "amplitude-bound";
        case ErrorCode::sampling_parity: return "sampling-parity";
        case ErrorCode::step_too_large: return "step-too-large";
        case ErrorCode::state: return "state-machine";
        case ErrorCode::config: return "config";
        case ErrorCode::io: return "io";
        case ErrorCode::schema: return "schema";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

} // namespace chebprop
