/**
 * @file
 * Fourth-order Magnus mode. Truncating the Magnus series after the first
 * commutator term and using Simpson's rule (first term) plus the trapezoidal
 * rule (commutator term) over samples (c^(1), c^(2), c^(3)) at t, t+dt, t+2dt
 * gives the step-2dt exponent
 *
 *   G = 2dt H_0 + dt sum_k (c_k^(1)/3 + 4c_k^(2)/3 + c_k^(3)/3) H_k
 *     + dt^2/3 sum_k (c_k^(3) - c_k^(1)) i[H_0, H_k]
 *     + dt^2/3 sum_{k<k'} (c_k^(1) c_k'^(3) - c_k^(3) c_k'^(1)) i[H_k, H_k'].
 *
 * The i[.,.] matrices are Hermitian, so G keeps the drift-plus-controls form
 * with N + N + N(N-1)/2 effective controls and real coefficients.
 */

#pragma once

#include <chebprop/hamiltonian.hpp>

namespace chebprop {

template <class T>
Matrix<T> commutator(const Matrix<T> &a, const Matrix<T> &b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::shape, "commutator dimension mismatch");
    return a * b - b * a;
}

/// N + N + N(N-1)/2
constexpr std::size_t effective_control_count(std::size_t n) noexcept {
    return 2 * n + n * (n - 1) / 2;
}

class EffectiveSystem {
  public:
    explicit EffectiveSystem(ControlSystem base);

    [[nodiscard]] const ControlSystem &base() const noexcept { return base_; }
    /// [H_1..H_N, i[H_0,H_1]..i[H_0,H_N], i[H_1,H_2], i[H_1,H_3], .., i[H_{N-1},H_N]]
    [[nodiscard]] const std::vector<Matrix<double>> &effective_controls() const noexcept { return effective_; }
    [[nodiscard]] std::size_t effective_count() const noexcept { return effective_.size(); }
    /// One-norms of the drift and every effective control, drift first.
    [[nodiscard]] const std::vector<double> &norms() const noexcept { return norms_; }
    [[nodiscard]] std::vector<Matrix<double>> basis() const;

  private:
    ControlSystem base_;
    std::vector<Matrix<double>> effective_;
    std::vector<double> norms_;
};

EffectiveSystem build_effective_system(const ControlSystem &system);

/// Per Magnus step j (samples 2j, 2j+1, 2j+2): columns
/// [2dt | Simpson terms (N) | drift-commutator terms (N) | cross terms (N(N-1)/2)].
template <Real T>
CoefficientTable<T> magnus_coefficients(const ControlAmplitudes &amps);

/// beta = 2dt sum_{i=0..N} ||H_i||_1 + 2dt^2/3 (sum_k ||[H_0,H_k]||_1 + sum_{k<k'} ||[H_k,H_k']||_1),
/// valid whenever |c| <= 1.
double magnus_spectral_bound(const EffectiveSystem &eff, const ControlAmplitudes &amps);

} // namespace chebprop
