/**
 * @file
 * Batched matrix exponential U = exp(-iG) for Hermitian G via a truncated
 * Chebyshev series evaluated with the Clenshaw recurrence.
 *
 * With the spectrum of G inside [alpha, beta] and
 * X = 2/(beta - alpha) * (G - (alpha + beta)/2 * I),
 *
 *     exp(-iG) ~= e^{-i(alpha+beta)/2} [a_0 I + 2 sum_{k=1}^{m} a_k T_k(X)],
 *     a_k = (-i)^k J_k((beta - alpha)/2),
 *
 * and the truncation error after m terms is bounded by
 *
 *     eps(m, s) = 4 (e^{1 - q^2} q)^{m+1},   q = s / (4m + 4),  s = beta - alpha.
 */

#pragma once

#include <chebprop/linalg_batch.hpp>

#include <optional>
#include <vector>

namespace chebprop {

inline constexpr int min_chebyshev_order = 3;
inline constexpr int max_chebyshev_order = 25;

/// Bessel function of the first kind J_k(x) for 0 <= k <= 64, 0 <= x <= 64,
/// by Miller's backward recurrence normalized with J_0 + 2 sum J_2m = 1.
double bessel_j(int k, double x);

/// Predicted truncation error of an order-m expansion over a spectrum of width `span`.
double chebyshev_error(int m, double span);

/// Smallest odd m in [3, 25] whose predicted error over [-norm_bound, norm_bound]
/// meets the precision target. Throws ErrorCode::step_too_large otherwise.
int select_m_max(double norm_bound, Precision precision);

/// Largest ||G|| (with alpha = -||G||, beta = ||G||) an order-m expansion resolves
/// to the precision target; solved by bisection.
double max_norm_for_order(int m, Precision precision);

struct ChebyshevPlan {
    double alpha = 0;
    double beta  = 0;
    int m_max    = min_chebyshev_order;
    /// a_0 .. a_{m_max}, computed in FP64 and rounded to the working precision at use.
    std::vector<cplx<double>> coeffs;
    cplx<double> phase{1, 0};
    Precision precision    = Precision::fp64;
    double predicted_error = 0;
};

/// Builds the plan for the spectral interval [alpha, beta]. `m_override`, when
/// set, replaces the automatic order choice; it must be odd in [3, 25] and
/// still meet the precision target.
ChebyshevPlan make_plan(double alpha, double beta, Precision precision, std::optional<int> m_override = std::nullopt);

/// Working arrays: X holds the normalized exponent, d0/d1 are the Clenshaw ping-pong pair.
template <class T>
struct ExpmWorkspace {
    MatrixBatch<T> x;
    MatrixBatch<T> d0;
    MatrixBatch<T> d1;
};

struct ExpmOptions {
    /// Verify every input is Hermitian before exponentiating.
    bool check_hermitian = false;
    /// Allowed max |G_ij - conj(G_ji)| relative to max(1, ||G||_1); 0 picks 64 eps of T.
    double hermitian_tolerance = 0;
};

/// Throws ErrorCode::hermiticity for the first matrix whose max |G_ij - conj(G_ji)|
/// exceeds `tolerance * max(1, ||G||_1)`; a tolerance of 0 picks 64 eps of T.
template <Real T>
void require_hermitian_batch(ConstBatchView<T> g, double tolerance = 0);

/// Exponentiates every G[k] as exp(-i G[k]). The result lives in the workspace
/// and stays valid until the workspace is reused. `g` may be the workspace's own
/// X buffer, in which case it is normalized in place.
template <Real T>
BatchView<T> expm_batch(const CpuBackend &backend, ConstBatchView<T> g, const ChebyshevPlan &plan,
                        ExpmWorkspace<T> &ws, const ExpmOptions &options = {});

/// Clenshaw evaluation on an already-normalized ws.x (spectrum inside [-1, 1]).
/// Issues exactly plan.m_max + 1 batched GEMM calls.
template <Real T>
BatchView<T> expm_normalized(const CpuBackend &backend, const ChebyshevPlan &plan, ExpmWorkspace<T> &ws);

} // namespace chebprop
