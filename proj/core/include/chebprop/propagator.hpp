/**
 * @file
 * Integrator context and the expand -> exponentiate -> reduce pipeline.
 *
 * Lifecycle: construct an Integrator (state `created`), load a system with
 * set_hamiltonian() (state `system_loaded`, may be repeated), then call
 * equiprop() any number of times with different amplitude tables. The
 * destructor releases all workspace.
 *
 * Time ordering: slice k starts at t = k dt and the total propagator is
 * U = U_{n-1} ... U_1 U_0, so that psi(T) = U psi(0).
 *
 * An Integrator is neither thread-safe nor reentrant. Distinct instances are
 * independent and may be used from different threads concurrently.
 */

#pragma once

#include <chebprop/chebyshev.hpp>
#include <chebprop/magnus.hpp>

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace chebprop {

enum class ContextState { created, system_loaded };

enum class ReductionOrder {
    pairwise,   ///< ceil(log2 n) rounds of batched adjacent-pair products
    sequential, ///< left-multiply one slice at a time
};

struct IntegratorConfig {
    Precision precision = Precision::fp64;
    BackendConfig backend{};
    /// Validate Hermiticity of every slice exponent before exponentiating.
    bool checked = false;
};

/// Config from a precision token ("fp32"/"fp64"); throws ErrorCode::config otherwise.
IntegratorConfig make_config(std::string_view precision, int threads = 0);

struct PlanSummary {
    int m_max              = 0;
    double beta            = 0;
    double predicted_error = 0;
};

struct PropagatorResult {
    Matrix<double> U;
    std::size_t slice_count = 0;
    PlanSummary plan;
    Precision precision = Precision::fp64;
};

class Integrator {
  public:
    explicit Integrator(IntegratorConfig config = {});
    ~Integrator();
    Integrator(Integrator &&) noexcept;
    Integrator &operator=(Integrator &&) noexcept;
    Integrator(const Integrator &)            = delete;
    Integrator &operator=(const Integrator &) = delete;

    [[nodiscard]] ContextState state() const noexcept;
    [[nodiscard]] const IntegratorConfig &config() const noexcept;
    [[nodiscard]] const CpuBackend &backend() const noexcept;

    /// Uploads the system, rounding it to the working precision. With `magnus`
    /// the commutators are computed here once; Magnus mode requires Simpson sampling.
    void set_hamiltonian(const ControlSystem &system, bool magnus = false,
                         Quadrature quadrature = Quadrature::midpoint);

    [[nodiscard]] bool magnus() const;
    [[nodiscard]] Quadrature quadrature() const;
    /// Controls seen by the expansion: N, or N + N + N(N-1)/2 in Magnus mode.
    [[nodiscard]] std::size_t effective_control_count() const;

    /// Fixes the Chebyshev order instead of choosing it from the spectral bound.
    void set_m_max_override(std::optional<int> m_max);
    [[nodiscard]] std::optional<int> m_max_override() const noexcept;

    /// Total propagator for the amplitude table. pts = 0 yields the identity.
    PropagatorResult equiprop(const ControlAmplitudes &amps, ReductionOrder order = ReductionOrder::pairwise);

    /// Cumulative propagators U_0, U_1 U_0, ..., accumulated sequentially; the
    /// last entry matches equiprop(amps, ReductionOrder::sequential) bitwise.
    std::vector<Matrix<double>> equiprop_all(const ControlAmplitudes &amps);

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Ordered product U_{n-1} ... U_0 of the batch by pairwise rounds.
/// Destroys the contents of `batch`; `scratch` must hold at least ceil(n/2)
/// matrices of the same dimension and must not overlap `batch`.
template <Real T>
Matrix<T> reduce_pairwise(const CpuBackend &backend, BatchView<T> batch, BatchView<T> scratch);

/// Non-destructive convenience overload. An empty batch gives the identity.
template <Real T>
Matrix<T> reduce_pairwise(const CpuBackend &backend, const MatrixBatch<T> &batch);

/// Left-to-right accumulation U_{n-1} (... (U_1 U_0)); writes every partial
/// product to `cumulative` when it is non-empty.
template <Real T>
Matrix<T> reduce_sequential(const CpuBackend &backend, ConstBatchView<T> batch, BatchView<T> cumulative = {});

/// U psi
std::vector<cplx<double>> apply(const Matrix<double> &U, std::span<const cplx<double>> psi);
/// U rho U^dagger
Matrix<double> apply(const Matrix<double> &U, const Matrix<double> &rho);

inline std::vector<cplx<double>> apply(const PropagatorResult &r, std::span<const cplx<double>> psi) {
    return apply(r.U, psi);
}
inline Matrix<double> apply(const PropagatorResult &r, const Matrix<double> &rho) { return apply(r.U, rho); }

} // namespace chebprop
