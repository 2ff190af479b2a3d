#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace chebprop {

/// Error categories surfaced by the library. The CLI maps them onto exit codes.
enum class ErrorCode {
    shape,           ///< dimension / count mismatch
    aliasing,        ///< output storage overlaps an input
    out_of_range,    ///< batch index outside [0, count)
    domain,          ///< argument outside a function's supported range
    hermiticity,     ///< matrix expected Hermitian is not
    amplitude_bound, ///< control amplitude outside [-1, 1]
    sampling_parity, ///< sample count incompatible with the quadrature rule
    step_too_large,  ///< exponent norm exceeds what the Chebyshev plan can resolve
    state,           ///< integrator lifecycle misuse
    config,          ///< invalid configuration value
    io,              ///< file could not be read or written
    schema,          ///< malformed problem file
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &message);

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace chebprop
