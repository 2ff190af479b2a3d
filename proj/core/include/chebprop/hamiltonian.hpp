/**
 * @file
 * Control-system model H(t) = H_0 + sum_i c_i(t) H_i and the expansion of
 * sampled amplitudes into per-slice exponents G.
 *
 * Sample convention: under the midpoint rule, sample k is the amplitude value
 * used for the whole slice [k dt, (k+1) dt). Callers that want a second-order
 * scheme should therefore sample c_i at the slice centres (k + 1/2) dt.
 * Under Simpson's rule, slice j covers samples (2j, 2j+1, 2j+2) with step 2 dt,
 * so pts = 2n + 1 samples give n slices.
 */

#pragma once

#include <chebprop/linalg_batch.hpp>

#include <optional>
#include <string_view>
#include <vector>

namespace chebprop {

/// Drift plus control Hamiltonians, ingested in FP64. Immutable once built.
class ControlSystem {
  public:
    /// Throws ErrorCode::shape for mismatched dimensions and
    /// ErrorCode::hermiticity when a matrix deviates from Hermitian by more
    /// than 1e-12 of its 1-norm.
    ControlSystem(Matrix<double> drift, std::vector<Matrix<double>> controls = {});

    [[nodiscard]] std::size_t dim() const noexcept { return drift_.dim(); }
    [[nodiscard]] std::size_t control_count() const noexcept { return controls_.size(); }
    [[nodiscard]] const Matrix<double> &drift() const noexcept { return drift_; }
    [[nodiscard]] const std::vector<Matrix<double>> &controls() const noexcept { return controls_; }
    /// One-norms, drift first.
    [[nodiscard]] const std::vector<double> &norms() const noexcept { return norms_; }
    /// Drift followed by the controls, the order used by every coefficient table.
    [[nodiscard]] std::vector<Matrix<double>> basis() const;

  private:
    Matrix<double> drift_;
    std::vector<Matrix<double>> controls_;
    std::vector<double> norms_;
};

/// pts x N table of real amplitudes c_i(t_k) on an equidistant grid.
class ControlAmplitudes {
  public:
    ControlAmplitudes(std::size_t pts, std::size_t controls, double dt, std::vector<double> values);
    /// pts samples of a drift-only problem.
    ControlAmplitudes(std::size_t pts, double dt);

    [[nodiscard]] std::size_t pts() const noexcept { return pts_; }
    [[nodiscard]] std::size_t controls() const noexcept { return controls_; }
    [[nodiscard]] double dt() const noexcept { return dt_; }
    [[nodiscard]] double operator()(std::size_t k, std::size_t i) const { return values_[k * controls_ + i]; }
    [[nodiscard]] const std::vector<double> &values() const noexcept { return values_; }

  private:
    std::size_t pts_;
    std::size_t controls_;
    double dt_;
    std::vector<double> values_;
};

struct AmplitudeViolation {
    std::size_t sample;
    std::size_t control;
    double value;
};

enum class Quadrature { midpoint, simpson };

Quadrature parse_quadrature(std::string_view token);
std::string_view to_string(Quadrature q) noexcept;

/// beta = dt * sum_{i=0..N} ||H_i||_1 (drift included); alpha = -beta.
double spectral_bound(const ControlSystem &system, double dt);

/// First entry outside [-1, 1] (or NaN), if any.
std::optional<AmplitudeViolation> validate_amplitudes(const ControlAmplitudes &amps);
/// Throws ErrorCode::amplitude_bound naming the first offending entry.
void require_valid_amplitudes(const ControlAmplitudes &amps);

/// Number of slices `pts` samples produce; throws ErrorCode::sampling_parity
/// when Simpson sampling gets an even count or a single sample.
std::size_t slice_count(std::size_t pts, Quadrature quadrature);

/// Absolute weights of [H_0, H_1, .., H_N] per slice, including dt.
template <Real T>
CoefficientTable<T> exponent_coefficients(const ControlAmplitudes &amps, Quadrature quadrature);

/// One exponent G per slice: midpoint G[k] = dt (H_0 + sum c_i(t_k) H_i);
/// Simpson G[j] = 2 dt H_0 + dt sum (c^(1)/3 + 4c^(2)/3 + c^(3)/3) H_i.
template <Real T>
MatrixBatch<T> build_exponent_batch(const CpuBackend &backend, const ControlSystem &system,
                                    const ControlAmplitudes &amps, Quadrature quadrature);

/// Rounds FP64 matrices to the working precision.
template <Real T>
std::vector<Matrix<T>> upload(const std::vector<Matrix<double>> &matrices);

} // namespace chebprop
