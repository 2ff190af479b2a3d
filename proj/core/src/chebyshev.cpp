#include <chebprop/chebyshev.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace chebprop {

double bessel_j(int k, double x) {
    if (k < 0 || k > 64 || !(x >= 0) || x > 64)
        throw Error(ErrorCode::domain, "bessel_j supports 0 <= k <= 64 and 0 <= x <= 64");
    if (x == 0)
        return k == 0 ? 1.0 : 0.0;
    if (x < 1e-5) {
        // Two leading series terms; the next one is below 1e-21 relative.
        long double half = x / 2.0L, term = 1.0L;
        for (int i = 1; i <= k; ++i)
            term *= half / i;
        return static_cast<double>(term * (1.0L - half * half / (k + 1)));
    }

    // Miller: recur downward from an order far above max(k, x), where the
    // minimal solution J_n is negligible, then normalize.
    const double top = std::max<double>(k, x);
    int start        = static_cast<int>(std::ceil(1.3 * top)) + 40;
    start += start % 2;

    constexpr long double rescale_at = 1e250L;
    const long double two_over_x     = 2.0L / x;
    long double next = 0, cur = 1e-30L; // j_{n+1}, j_n with n = start
    long double norm = 0, want = 0;
    for (int n = start; n > 0; --n) {
        const long double prev = n * two_over_x * cur - next; // j_{n-1}
        next                   = cur;
        cur                    = prev;
        if (n - 1 == k)
            want = cur;
        if ((n - 1) % 2 == 0)
            norm += (n - 1 == 0) ? cur : 2 * cur;
        if (std::fabs(cur) > rescale_at) {
            cur /= rescale_at;
            next /= rescale_at;
            norm /= rescale_at;
            want /= rescale_at;
        }
    }
    return static_cast<double>(want / norm);
}

double chebyshev_error(int m, double span) {
    if (m < 1 || !(span >= 0))
        throw Error(ErrorCode::domain, "chebyshev_error needs m >= 1 and span >= 0");
    if (span == 0)
        return 0;
    const double q = span / (4.0 * m + 4.0);
    return 4.0 * std::pow(std::exp(1.0 - q * q) * q, m + 1);
}

namespace {

// The bound decreases with m only while q^2 + ln q < 0 (q ~< 0.653).
bool bound_trusted(int m, double span) {
    if (span == 0)
        return true;
    const double q = span / (4.0 * m + 4.0);
    return q * q + std::log(q) < 0;
}

bool order_resolves(int m, double span, Precision p) {
    return bound_trusted(m, span) && chebyshev_error(m, span) <= target_epsilon(p);
}

void check_order(int m) {
    if (m < min_chebyshev_order || m > max_chebyshev_order || m % 2 == 0)
        throw Error(ErrorCode::config, "m_max must be odd and within [3, 25], got " + std::to_string(m));
}

} // namespace

int select_m_max(double norm_bound, Precision precision) {
    if (!(norm_bound >= 0) || !std::isfinite(norm_bound))
        throw Error(ErrorCode::domain, "norm bound must be finite and >= 0");
    for (int m = min_chebyshev_order; m <= max_chebyshev_order; m += 2)
        if (order_resolves(m, 2 * norm_bound, precision))
            return m;
    std::ostringstream msg;
    msg << "exponent norm bound " << norm_bound << " exceeds the order-25 limit "
        << max_norm_for_order(max_chebyshev_order, precision) << " for " << to_string(precision)
        << "; reduce the time step";
    throw Error(ErrorCode::step_too_large, msg.str());
}

double max_norm_for_order(int m, Precision precision) {
    if (m < 1)
        throw Error(ErrorCode::domain, "order must be >= 1");
    // eps(m, 2g) increases monotonically in g over the trusted range.
    double lo = 0, hi = 1;
    while (order_resolves(m, 2 * hi, precision))
        hi *= 2;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (order_resolves(m, 2 * mid, precision) ? lo : hi) = mid;
    }
    return lo;
}

ChebyshevPlan make_plan(double alpha, double beta, Precision precision, std::optional<int> m_override) {
    if (!std::isfinite(alpha) || !std::isfinite(beta) || alpha > beta)
        throw Error(ErrorCode::domain, "spectral bounds must be finite with alpha <= beta");
    const double span = beta - alpha;

    ChebyshevPlan plan;
    plan.alpha     = alpha;
    plan.beta      = beta;
    plan.precision = precision;
    if (m_override) {
        check_order(*m_override);
        if (!order_resolves(*m_override, span, precision)) {
            std::ostringstream msg;
            msg << "m_max = " << *m_override << " cannot resolve a spectral width of " << span << " in "
                << to_string(precision) << " (limit " << 2 * max_norm_for_order(*m_override, precision)
                << "); reduce the time step or raise m_max";
            throw Error(ErrorCode::step_too_large, msg.str());
        }
        plan.m_max = *m_override;
    } else {
        plan.m_max = select_m_max(span / 2, precision);
    }
    plan.predicted_error = chebyshev_error(plan.m_max, span);

    plan.coeffs.resize(static_cast<std::size_t>(plan.m_max) + 1);
    const cplx<double> minus_i{0, -1};
    cplx<double> power{1, 0};
    for (int k = 0; k <= plan.m_max; ++k) {
        plan.coeffs[static_cast<std::size_t>(k)] = power * bessel_j(k, span / 2);
        power *= minus_i;
    }
    const double center = 0.5 * (alpha + beta);
    plan.phase          = center == 0 ? cplx<double>{1, 0} : std::exp(cplx<double>{0, -center});
    return plan;
}

template <Real T>
void require_hermitian_batch(ConstBatchView<T> g, double tolerance) {
    const double tol = tolerance > 0 ? tolerance : 64 * std::numeric_limits<T>::epsilon();
    for (std::size_t k = 0; k < g.count; ++k) {
        const ConstMatrixView<T> m = g.matrix_view(k);
        double defect              = 0;
        for (std::size_t i = 0; i < g.dim; ++i)
            for (std::size_t j = i; j < g.dim; ++j)
                defect = std::max(defect, static_cast<double>(std::abs(m(i, j) - std::conj(m(j, i)))));
        if (defect > tol * std::max(1.0, one_norm(m))) {
            std::ostringstream msg;
            msg << "exponent " << k << " is not Hermitian (max asymmetry " << defect << ")";
            throw Error(ErrorCode::hermiticity, msg.str());
        }
    }
}

template <Real T>
BatchView<T> expm_normalized(const CpuBackend &backend, const ChebyshevPlan &plan, ExpmWorkspace<T> &ws) {
    const std::size_t d = ws.x.dim(), n = ws.x.count();
    ws.d0.reshape(d, n);
    ws.d1.reshape(d, n);
    ws.d0.fill_zero();
    ws.d1.fill_zero();

    auto coeff = [&](int k) {
        const auto &a = plan.coeffs[static_cast<std::size_t>(k)];
        return cplx<T>(static_cast<T>(a.real()), static_cast<T>(a.imag()));
    };

    // Two recurrence steps per iteration: p carries D_{k+1}, q carries D_{k+2}.
    // The final step uses beta = -2 so p ends up holding D_0 - D_2 directly.
    const ConstBatchView<T> x = ws.x.view();
    BatchView<T> p = ws.d1.view(), q = ws.d0.view();
    for (int k = plan.m_max; k >= 1; k -= 2) {
        backend.gemm_strided_batched<T>(x, p, T(2), T(-1), q);
        backend.diagonal_add_batched<T>(q, coeff(k));
        backend.gemm_strided_batched<T>(x, q, T(2), k - 1 == 0 ? T(-2) : T(-1), p);
        backend.diagonal_add_batched<T>(p, coeff(k - 1));
    }

    if (plan.phase != cplx<double>{1, 0}) {
        const cplx<T> ph(static_cast<T>(plan.phase.real()), static_cast<T>(plan.phase.imag()));
        for (auto &z : ws.d1.elements())
            z *= ph;
    }
    return p;
}

template <Real T>
BatchView<T> expm_batch(const CpuBackend &backend, ConstBatchView<T> g, const ChebyshevPlan &plan,
                        ExpmWorkspace<T> &ws, const ExpmOptions &options) {
    if (g.count > 0 && (g.dim == 0 || g.stride < g.dim * g.dim))
        throw Error(ErrorCode::shape, "invalid exponent batch");
    if (plan.coeffs.size() != static_cast<std::size_t>(plan.m_max) + 1 || plan.m_max % 2 == 0)
        throw Error(ErrorCode::config, "malformed Chebyshev plan");
    const std::size_t d = std::max<std::size_t>(g.dim, 1), n = g.count;

    if (options.check_hermitian)
        require_hermitian_batch<T>(g, options.hermitian_tolerance);

    const bool in_place = ws.x.count() == n && ws.x.dim() == d && g.base == ws.x.view().base && g.stride == d * d;
    if (!in_place) {
        ws.x.reshape(d, n);
        for (std::size_t k = 0; k < n; ++k)
            std::copy_n(g.matrix(k), d * d, ws.x.view().matrix(k));
    }

    const double span = plan.beta - plan.alpha;
    if (span == 0) {
        ws.x.fill_zero();
    } else {
        const T scale  = static_cast<T>(2.0 / span);
        const T center = static_cast<T>(0.5 * (plan.alpha + plan.beta));
        BatchView<T> xv = ws.x.view();
        if (center != T(0))
            backend.diagonal_add_batched<T>(xv, cplx<T>(-center));
        for (auto &z : ws.x.elements())
            z *= scale;
    }
    return expm_normalized<T>(backend, plan, ws);
}

template void require_hermitian_batch<float>(ConstBatchView<float>, double);
template void require_hermitian_batch<double>(ConstBatchView<double>, double);
template BatchView<float> expm_normalized<float>(const CpuBackend &, const ChebyshevPlan &, ExpmWorkspace<float> &);
template BatchView<double> expm_normalized<double>(const CpuBackend &, const ChebyshevPlan &,
                                                   ExpmWorkspace<double> &);
template BatchView<float> expm_batch<float>(const CpuBackend &, ConstBatchView<float>, const ChebyshevPlan &,
                                            ExpmWorkspace<float> &, const ExpmOptions &);
template BatchView<double> expm_batch<double>(const CpuBackend &, ConstBatchView<double>, const ChebyshevPlan &,
                                              ExpmWorkspace<double> &, const ExpmOptions &);

} // namespace chebprop
