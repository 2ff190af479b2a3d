#include "expect_error.hpp"
#include "oracles.hpp"

#include <chebprop/chebyshev.hpp>
#include <chebprop/studies.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace chebprop;

namespace {

constexpr double eps64 = std::numeric_limits<double>::epsilon();

template <Real T>
MatrixBatch<T> single(const Matrix<double> &g) {
    MatrixBatch<T> b(g.dim(), 1);
    b.set(0, g.cast<T>());
    return b;
}

template <Real T>
Matrix<double> expm_one(const Matrix<double> &g, const ChebyshevPlan &plan) {
    CpuBackend be;
    ExpmWorkspace<T> ws;
    const auto batch = single<T>(g);
    const auto out   = expm_batch<T>(be, batch.view(), plan, ws);
    Matrix<T> u(g.dim());
    std::copy_n(out.matrix(0), g.dim() * g.dim(), u.data());
    return u.template cast<double>();
}

Matrix<double> scaled_to_norm(Matrix<double> g, double norm) {
    const double s = norm / one_norm(g);
    for (auto &z : g.elements())
        z *= s;
    return g;
}

} // namespace

// ---------------------------------------------------------------- Bessel

TEST(Bessel, Examples) {
    EXPECT_EQ(bessel_j(0, 0), 1.0);
    EXPECT_EQ(bessel_j(3, 0), 0.0);
    EXPECT_NEAR(bessel_j(0, 1), 0.76519768655796655, 2 * eps64);
    EXPECT_NEAR(bessel_j(0, 1), static_cast<double>(oracle::bessel_series(0, 1)), eps64);
}

TEST(Bessel, DomainErrors) {
    EXPECT_ERROR_CODE(bessel_j(-1, 1), ErrorCode::domain);
    EXPECT_ERROR_CODE(bessel_j(65, 1), ErrorCode::domain);
    EXPECT_ERROR_CODE(bessel_j(0, -0.5), ErrorCode::domain);
    EXPECT_ERROR_CODE(bessel_j(0, 64.5), ErrorCode::domain);
    EXPECT_ERROR_CODE(bessel_j(0, std::nan("")), ErrorCode::domain);
    EXPECT_NO_THROW(bessel_j(64, 64));
}

TEST(Bessel, MatchesPowerSeriesToFourUlp) {
    // The long-double series is exact to well below an FP64 ulp for x <= 8.
    for (int k = 0; k <= 64; ++k) {
        for (double x : {1e-9, 3e-6, 1e-3, 0.0168, 0.1, 0.25, 0.5, 1.0, 1.7, 2.4048, 3.0, 5.0, 6.5, 8.0}) {
            const long double ref = oracle::bessel_series(k, x);
            if (std::abs(ref) < std::numeric_limits<double>::min())
                continue; // below the normal FP64 range
            const double got = bessel_j(k, x);
            const double err = static_cast<double>(std::abs(got - ref));
            // x = 2.4048 sits next to the first zero of J0; there the series itself only resolves ~1e-19 absolute
            EXPECT_LE(err, 4 * eps64 * std::max(static_cast<double>(std::abs(ref)), 1e-4)) << "k=" << k << " x=" << x;
        }
    }
}

TEST(Bessel, MatchesIntegralRepresentation) {
    // Over the full argument range; relative where |J| is not near a zero.
    for (int k = 0; k <= 64; k += 3) {
        for (double x = 0.5; x <= 64.0; x += 2.75) {
            const long double ref = oracle::bessel_integral(k, x, 1024);
            const double got      = bessel_j(k, x);
            const double err      = static_cast<double>(std::abs(got - ref));
            if (std::abs(ref) > 1e-3)
                EXPECT_LE(err / static_cast<double>(std::abs(ref)), 4 * eps64) << "k=" << k << " x=" << x;
            else
                // the trapezoid sum cancels O(1) terms, so the oracle itself carries ~1e-18 absolute rounding
                EXPECT_LE(err, 2e-18 + 4 * eps64 * static_cast<double>(std::abs(ref))) << "k=" << k << " x=" << x;
        }
    }
}

TEST(Bessel, AgreesWithStandardLibrary) {
    for (int k : {0, 1, 2, 7, 25})
        for (double x : {0.3, 2.0, 9.9, 33.0})
            EXPECT_NEAR(bessel_j(k, x), std::cyl_bessel_j(static_cast<double>(k), x), 1e-14) << k << " " << x;
}

// ---------------------------------------------------------------- error bound / order selection

TEST(ChebyshevError, Examples) {
    EXPECT_EQ(chebyshev_error(5, 0), 0.0);
    EXPECT_LE(chebyshev_error(9, 2 * 1.218), 0x1p-24);
    EXPECT_GT(chebyshev_error(9, 2 * 1.23), 0x1p-24);
    EXPECT_LE(chebyshev_error(7, 2 * 0.050), 0x1p-53);
    // closed form at a hand-checked point: q = 1/8
    const double q = 2.0 / 16.0;
    EXPECT_NEAR(chebyshev_error(3, 2.0), 4 * std::pow(std::exp(1 - q * q) * q, 4), 1e-18);
    EXPECT_ERROR_CODE(chebyshev_error(0, 1), ErrorCode::domain);
    EXPECT_ERROR_CODE(chebyshev_error(3, -1), ErrorCode::domain);
}

TEST(SelectOrder, Examples) {
    EXPECT_EQ(select_m_max(0.03, Precision::fp32), 3);
    EXPECT_EQ(select_m_max(0.5, Precision::fp64), 13);
    EXPECT_EQ(select_m_max(0.0, Precision::fp64), 3);
    EXPECT_ERROR_CODE(select_m_max(10.0, Precision::fp32), ErrorCode::step_too_large);
    try {
        (void)select_m_max(10.0, Precision::fp32);
    } catch (const Error &e) {
        EXPECT_NE(std::string(e.what()).find("time step"), std::string::npos);
    }
    EXPECT_ERROR_CODE(select_m_max(-1.0, Precision::fp32), ErrorCode::domain);
}

TEST(SelectOrder, ConsistentWithOrderLimits) {
    for (Precision p : {Precision::fp32, Precision::fp64}) {
        double previous = 0;
        for (int m = min_chebyshev_order; m <= max_chebyshev_order; m += 2) {
            const double limit = max_norm_for_order(m, p);
            EXPECT_GT(limit, previous);
            EXPECT_EQ(select_m_max(limit, p), m);
            EXPECT_EQ(select_m_max(0.5 * (limit + previous), p), m);
            if (m < max_chebyshev_order)
                EXPECT_EQ(select_m_max(limit * (1 + 1e-9), p), m + 2);
            previous = limit;
        }
        EXPECT_ERROR_CODE(select_m_max(previous * 1.001, p), ErrorCode::step_too_large);
    }
}

// ---------------------------------------------------------------- plans

TEST(Plan, Examples) {
    const auto sym = make_plan(-0.7, 0.7, Precision::fp64);
    EXPECT_EQ(sym.phase, cplx<double>(1, 0));
    EXPECT_EQ(sym.m_max, select_m_max(0.7, Precision::fp64));
    EXPECT_LE(sym.predicted_error, 0x1p-53);

    const auto zero = make_plan(0, 0, Precision::fp32);
    EXPECT_EQ(zero.m_max, 3);
    ASSERT_EQ(zero.coeffs.size(), 4u);
    EXPECT_EQ(zero.coeffs[0], cplx<double>(1, 0));
    for (int k = 1; k <= 3; ++k)
        EXPECT_EQ(std::abs(zero.coeffs[k]), 0.0);

    const auto unit = make_plan(-1, 1, Precision::fp64);
    EXPECT_NEAR(unit.coeffs[1].real(), 0.0, 1e-300);
    EXPECT_NEAR(unit.coeffs[1].imag(), -static_cast<double>(oracle::bessel_series(1, 1)), 2 * eps64);
    EXPECT_NEAR(unit.coeffs[1].imag(), -0.44005058574493355, 2 * eps64);
    for (int k = 0; k <= unit.m_max; ++k) {
        // (-i)^k J_k(1)
        const cplx<double> expected = std::pow(cplx<double>(0, -1), k) * static_cast<double>(oracle::bessel_series(k, 1));
        EXPECT_NEAR(std::abs(unit.coeffs[k] - expected), 0.0, 4 * eps64 * std::abs(expected) + 1e-300) << k;
    }
}

TEST(Plan, ShiftedIntervalCarriesPhase) {
    const auto p = make_plan(0.2, 1.0, Precision::fp64);
    EXPECT_NEAR(std::abs(p.phase - std::exp(cplx<double>(0, -0.6))), 0.0, 1e-16);
    EXPECT_EQ(p.m_max, select_m_max(0.4, Precision::fp64));
    EXPECT_ERROR_CODE(make_plan(1.0, 0.5, Precision::fp64), ErrorCode::domain);
}

TEST(Plan, OrderOverride) {
    EXPECT_EQ(make_plan(-0.1, 0.1, Precision::fp64, 25).m_max, 25);
    EXPECT_ERROR_CODE(make_plan(-0.1, 0.1, Precision::fp64, 4), ErrorCode::config);
    EXPECT_ERROR_CODE(make_plan(-0.1, 0.1, Precision::fp64, 27), ErrorCode::config);
    EXPECT_ERROR_CODE(make_plan(-0.1, 0.1, Precision::fp64, 1), ErrorCode::config);
    // beyond what m = 3 resolves
    EXPECT_ERROR_CODE(make_plan(-2.0, 2.0, Precision::fp64, 3), ErrorCode::step_too_large);
}

// ---------------------------------------------------------------- expm_batch examples

TEST(Expm, ZeroExponentGivesIdentity) {
    CpuBackend be;
    MatrixBatch<double> g(3, 5);
    ExpmWorkspace<double> ws;
    const auto out = expm_batch<double>(be, g.view(), make_plan(0, 0, Precision::fp64), ws);
    for (std::size_t k = 0; k < 5; ++k) {
        Matrix<double> u(3);
        std::copy_n(out.matrix(k), 9, u.data());
        EXPECT_LE(max_abs_diff(u, Matrix<double>::identity(3)), 1e-16);
    }
}

TEST(Expm, DiagonalExponent) {
    const Matrix<double> g{{0.3, 0, 0}, {0, -0.9, 0}, {0, 0, 0.05}};
    const auto plan = make_plan(-0.9, 0.9, Precision::fp64);
    const auto u    = expm_one<double>(g, plan);
    for (std::size_t i = 0; i < 3; ++i)
        EXPECT_LE(std::abs(u(i, i) - std::exp(cplx<double>(0, -g(i, i).real()))), plan.predicted_error + 8 * eps64);
    EXPECT_LE(std::abs(u(0, 1)) + std::abs(u(1, 2)) + std::abs(u(2, 0)), 1e-15);
}

TEST(Expm, HalfPiSigmaX) {
    const Matrix<double> g = cplx<double>(std::numbers::pi / 2) * oracle::pauli_x();
    const auto plan        = make_plan(-one_norm(g), one_norm(g), Precision::fp64);
    const auto u           = expm_one<double>(g, plan);
    EXPECT_LE(max_abs_diff(u, cplx<double>(0, -1) * oracle::pauli_x()), 10 * plan.predicted_error + 100 * eps64);
}

TEST(Expm, ScalarBatchesMatchComplexExponential) {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    MatrixBatch<double> g(1, 100);
    for (std::size_t k = 0; k < 100; ++k)
        g.view().matrix(k)[0] = u(rng);
    CpuBackend be;
    ExpmWorkspace<double> ws;
    const auto plan = make_plan(-2, 2, Precision::fp64);
    const auto out  = expm_batch<double>(be, g.view(), plan, ws);
    for (std::size_t k = 0; k < 100; ++k) {
        const double x = g.view().matrix(k)[0].real();
        EXPECT_LE(std::abs(out.matrix(k)[0] - std::exp(cplx<double>(0, -x))), plan.predicted_error + 16 * eps64);
    }
}

TEST(Expm, ShiftedSpectrumUsesPhase) {
    // G = 5 I + small Hermitian part; spectrum inside [4.8, 5.2].
    std::mt19937_64 rng(22);
    Matrix<double> g = scaled_to_norm(oracle::random_hermitian(3, rng), 0.2);
    for (std::size_t i = 0; i < 3; ++i)
        g(i, i) += 5.0;
    const auto plan = make_plan(4.8, 5.2, Precision::fp64);
    EXPECT_NE(plan.phase, cplx<double>(1, 0));
    EXPECT_LE(oracle::max_abs_diff_ld(expm_one<double>(g, plan), oracle::expm_hermitian(g)), 100 * eps64);
}

// ---------------------------------------------------------------- expm_batch invariants

template <Real T>
void check_oracle_and_unitarity(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const Precision p   = precision_of<T>;
    const double mach   = std::numeric_limits<T>::epsilon();
    for (int m = min_chebyshev_order; m <= max_chebyshev_order; m += 2) {
        const double bound = max_norm_for_order(m, p);
        for (std::size_t d : {1u, 2u, 3u, 5u, 8u}) {
            const auto g    = scaled_to_norm(oracle::random_hermitian(d, rng), 0.95 * bound);
            const auto plan = make_plan(-one_norm(g), one_norm(g), p);
            ASSERT_EQ(plan.m_max, m);
            const auto u = expm_one<T>(g, plan);
            EXPECT_LE(oracle::max_abs_diff_ld(u, oracle::expm_hermitian(g)), 10 * plan.predicted_error + 100 * mach)
                << "m=" << m << " d=" << d;
            EXPECT_LE(unitarity_defect(u), 64 * mach * d) << "m=" << m << " d=" << d;
        }
    }
}

TEST(ExpmInvariants, OracleAndUnitarityDouble) { check_oracle_and_unitarity<double>(31); }
TEST(ExpmInvariants, OracleAndUnitarityFloat) { check_oracle_and_unitarity<float>(32); }

TEST(ExpmInvariants, DeterminantPhase) {
    std::mt19937_64 rng(33);
    for (int trial = 0; trial < 60; ++trial) {
        const std::size_t d = 1 + trial % 4;
        const auto g        = scaled_to_norm(oracle::random_hermitian(d, rng), 0.1 + 0.07 * trial);
        const auto u        = expm_one<double>(g, make_plan(-one_norm(g), one_norm(g), Precision::fp64));
        const cplx<double> expected = std::exp(cplx<double>(0, -trace(g).real()));
        EXPECT_LE(std::abs(determinant(u) - expected), 1e-12) << trial;
    }
}

TEST(ExpmInvariants, GemmCountIsOrderPlusOne) {
    std::mt19937_64 rng(34);
    for (std::size_t count : {1u, 7u, 300u}) {
        for (int m = min_chebyshev_order; m <= max_chebyshev_order; m += 2) {
            MatrixBatch<double> g(2, count);
            for (std::size_t k = 0; k < count; ++k)
                g.set(k, scaled_to_norm(oracle::random_hermitian(2, rng), 0.5 * max_norm_for_order(m, Precision::fp64)));
            CpuBackend be;
            ExpmWorkspace<double> ws;
            const auto plan = make_plan(-max_norm_for_order(m, Precision::fp64), max_norm_for_order(m, Precision::fp64),
                                        Precision::fp64);
            ASSERT_EQ(plan.m_max, m);
            (void)expm_batch<double>(be, g.view(), plan, ws);
            EXPECT_EQ(be.counters().gemm_calls, static_cast<std::size_t>(m) + 1) << "count=" << count;
        }
    }
}

TEST(ExpmInvariants, InPlaceMatchesCopy) {
    std::mt19937_64 rng(35);
    MatrixBatch<double> g(4, 9);
    for (std::size_t k = 0; k < 9; ++k)
        g.set(k, scaled_to_norm(oracle::random_hermitian(4, rng), 0.3));
    const auto plan = make_plan(-0.3, 0.3, Precision::fp64);
    CpuBackend be;
    ExpmWorkspace<double> a, b;
    const auto out_a = expm_batch<double>(be, g.view(), plan, a);
    b.x              = g;
    const auto out_b = expm_batch<double>(be, b.x.view(), plan, b);
    for (std::size_t e = 0; e < 9 * 16; ++e)
        EXPECT_EQ(out_a.base[e], out_b.base[e]);
}

TEST(ExpmInvariants, CheckedModeRejectsNonHermitian) {
    MatrixBatch<double> g(2, 3);
    g.set(2, Matrix<double>{{0, 0.5}, {0.1, 0}});
    CpuBackend be;
    ExpmWorkspace<double> ws;
    ExpmOptions checked;
    checked.check_hermitian = true;
    const auto plan         = make_plan(-1, 1, Precision::fp64);
    EXPECT_ERROR_CODE(expm_batch<double>(be, g.view(), plan, ws, checked), ErrorCode::hermiticity);
    EXPECT_NO_THROW(expm_batch<double>(be, g.view(), plan, ws));
    g.set(2, oracle::pauli_y());
    EXPECT_NO_THROW(expm_batch<double>(be, g.view(), plan, ws, checked));
}

TEST(ExpmInvariants, WorkspaceReuseIsStable) {
    std::mt19937_64 rng(36);
    CpuBackend be;
    ExpmWorkspace<float> ws;
    const auto plan = make_plan(-1, 1, Precision::fp32);
    for (std::size_t n : {50u, 3u, 80u}) {
        MatrixBatch<float> g(3, n);
        for (std::size_t k = 0; k < n; ++k)
            g.set(k, scaled_to_norm(oracle::random_hermitian(3, rng), 1.0).cast<float>());
        const auto out = expm_batch<float>(be, g.view(), plan, ws);
        ASSERT_EQ(out.count, n);
        Matrix<float> u(3);
        std::copy_n(out.matrix(n - 1), 9, u.data());
        EXPECT_LE(oracle::max_abs_diff_ld(u, oracle::expm_hermitian(g.get(n - 1))), 1e-5);
    }
}
