/**
 * @file
 * Numerical experiments driven by the command-line tool: convergence of the
 * driven-qubit problem against its closed-form propagator, regeneration of
 * the Chebyshev order table, and runtime scaling measurements.
 */

#pragma once

#include <chebprop/propagator.hpp>

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace chebprop {

/// Qubit under a circularly polarized drive:
/// H(t) = w0/2 sz + cos(w_rf t) w1/2 sx + sin(w_rf t) w1/2 sy.
struct DrivenQubit {
    double omega0   = 1.0;
    double omega1   = 0.1;
    double omega_rf = 1.0;
    double duration = 6.0;
};

/// Drift w0/2 sz with controls w1/2 sx and w1/2 sy, amplitudes cos/sin.
ControlSystem driven_qubit_system(const DrivenQubit &q);

/// Amplitudes for `pts` samples over [0, duration]. Midpoint: dt = T/pts,
/// sampled at slice centres. Simpson (and Magnus): pts must be odd,
/// dt = T/(pts - 1), sampled at k dt.
ControlAmplitudes driven_qubit_amplitudes(const DrivenQubit &q, std::size_t pts, Quadrature quadrature);

/// Closed form: e^{-i w_rf t sz/2} e^{-i t ((w0 - w_rf) sz + w1 sx)/2}.
Matrix<double> driven_qubit_exact(const DrivenQubit &q, double t);

/// Independent fine-step reference: sequential midpoint product of closed-form
/// 2x2 slice exponentials, no batching.
Matrix<double> driven_qubit_reference(const DrivenQubit &q, std::size_t steps);

/// ||U^dagger U - I||_1
double unitarity_defect(const Matrix<double> &U);

/// Determinant by partial-pivot elimination.
cplx<double> determinant(Matrix<double> m);

/// U rescaled by the global phase that makes det(U) match det(reference).
Matrix<double> phase_align(const Matrix<double> &U, const Matrix<double> &reference);

struct PropagationMode {
    bool magnus           = false;
    Quadrature quadrature = Quadrature::midpoint;
    Precision precision   = Precision::fp64;
};

std::string describe(const PropagationMode &mode);

struct ConvergencePoint {
    std::size_t pts    = 0;
    std::size_t slices = 0;
    double error       = 0; ///< max elementwise |U - U_exact|
    double unitarity   = 0; ///< ||U^dagger U - I||_1
    double trace_error = 0; ///< |tr(U rho U^dagger) - tr(rho)| for rho = |0><0|
    int m_max          = 0;
};

/// Sample counts log-spaced over [lo, hi] with `per_decade` points per decade;
/// forced odd (rounded up) when `odd` is set. Strictly increasing.
std::vector<std::size_t> log_spaced_counts(std::size_t lo, std::size_t hi, int per_decade, bool odd);

std::vector<ConvergencePoint> convergence_sweep(const DrivenQubit &q, std::span<const std::size_t> pts,
                                                const PropagationMode &mode, bool align_phase = false);

struct SlopeFit {
    bool valid       = false;
    double slope     = 0; ///< d log(error) / d log(dt), i.e. the convergence order
    double intercept = 0;
    std::size_t first = 0, last = 0; ///< inclusive window into the series
    double decades   = 0;            ///< span of dt covered by the window
};

/// Least-squares order over the pre-floor window: the longest contiguous run
/// ending at or before the minimum error in which the error decreases
/// monotonically and stays at least `floor_margin` times above the floor.
SlopeFit fit_convergence_slope(std::span<const ConvergencePoint> series, double floor_margin = 10.0);

/// Largest ||G|| each odd order 3..25 resolves to the precision target.
std::vector<double> table1_row(Precision precision);

/// Plain-text table, one row per precision. Norms below 1e-3 are printed
/// with one significant digit, the rest with three decimals.
std::string format_table1(std::span<const Precision> rows);
std::string format_table1(); ///< fp32 and fp64 rows

struct BenchPoint {
    std::size_t dim = 0;
    std::size_t pts = 0;
    double seconds  = 0; ///< median over repeats
};

/// Random Hermitian matrix with entries drawn uniformly from the unit disc.
Matrix<double> random_hermitian(std::size_t dim, std::mt19937_64 &rng);

/// Times equiprop on random Hermitian systems (two controls, random amplitudes).
std::vector<BenchPoint> run_bench(std::span<const std::size_t> dims, std::span<const std::size_t> pts,
                                  Precision precision, int repeats, std::uint64_t seed);

struct LinearFit {
    double intercept = 0;
    double slope     = 0;
    double max_relative_residual = 0; ///< max |y - fit| / y
};

/// y = intercept + slope x, fitted by least squares on relative residuals so
/// that samples spanning several decades weigh equally. y must be positive.
LinearFit fit_linear(std::span<const double> x, std::span<const double> y);

} // namespace chebprop
