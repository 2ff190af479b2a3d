#include "expect_error.hpp"
#include "oracles.hpp"

#include <chebprop/studies.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace chebprop;

namespace {

Matrix<double> hamiltonian_at(const DrivenQubit &q, double t) {
    const cplx<double> h0(q.omega0 / 2), h1(q.omega1 / 2);
    return h0 * oracle::pauli_z() + cplx<double>(std::cos(q.omega_rf * t)) * h1 * oracle::pauli_x() +
           cplx<double>(std::sin(q.omega_rf * t)) * h1 * oracle::pauli_y();
}

std::vector<ConvergencePoint> synthetic_series(double order, double floor) {
    std::vector<ConvergencePoint> s;
    for (std::size_t n : {10u, 18u, 32u, 56u, 100u, 178u, 316u, 562u, 1000u, 1778u, 3162u}) {
        ConvergencePoint p;
        p.pts    = n;
        p.slices = n;
        p.error  = std::max(3.0 * std::pow(static_cast<double>(n), -order), floor);
        s.push_back(p);
    }
    return s;
}

} // namespace

TEST(DrivenQubit, ClosedFormSolvesSchrodinger) {
    // i dU/dt = H(t) U checked by central differences at several times.
    const DrivenQubit q;
    const double h = 1e-4;
    for (double t : {0.3, 1.7, 4.2, 6.0}) {
        const Matrix<double> dudt = cplx<double>(1 / (2 * h)) * (driven_qubit_exact(q, t + h) - driven_qubit_exact(q, t - h));
        const Matrix<double> rhs  = cplx<double>(0, -1) * (hamiltonian_at(q, t) * driven_qubit_exact(q, t));
        EXPECT_LE(max_abs_diff(dudt, rhs), 1e-8) << t;
    }
    EXPECT_LE(max_abs_diff(driven_qubit_exact(q, 0), Matrix<double>::identity(2)), 1e-16);
}

TEST(DrivenQubit, FineReferenceAgreesWithClosedForm) {
    const DrivenQubit q;
    EXPECT_LE(max_abs_diff(driven_qubit_reference(q, 200000), driven_qubit_exact(q, q.duration)), 1e-8);
}

TEST(DrivenQubit, AmplitudeGrids) {
    const DrivenQubit q;
    const auto mid = driven_qubit_amplitudes(q, 60, Quadrature::midpoint);
    EXPECT_DOUBLE_EQ(mid.dt(), 0.1);
    EXPECT_DOUBLE_EQ(mid(0, 0), std::cos(0.05));
    const auto simp = driven_qubit_amplitudes(q, 61, Quadrature::simpson);
    EXPECT_DOUBLE_EQ(simp.dt(), 0.1);
    EXPECT_EQ(simp(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(simp(60, 1), std::sin(6.0));
    EXPECT_ERROR_CODE(driven_qubit_amplitudes(q, 60, Quadrature::simpson), ErrorCode::sampling_parity);
}

TEST(Helpers, DeterminantAndPhaseAlignment) {
    EXPECT_EQ(determinant(Matrix<double>{{1, 2}, {3, 4}}), cplx<double>(-2, 0));
    EXPECT_NEAR(std::abs(determinant(Matrix<double>{{2, 0, 1}, {1, 3, 2}, {1, 1, 2}}) - cplx<double>(6)), 0.0, 1e-15);
    EXPECT_EQ(determinant(Matrix<double>(2)), cplx<double>(0));
    std::mt19937_64 rng(81);
    const auto u       = oracle::random_unitary(3, rng);
    const auto shifted = std::polar(1.0, 0.4) * u;
    EXPECT_LE(max_abs_diff(phase_align(shifted, u), u), 1e-14);
    EXPECT_LE(unitarity_defect(u), 1e-14);
    EXPECT_NEAR(unitarity_defect(cplx<double>(1.1) * Matrix<double>::identity(2)), 0.21, 1e-14);
}

TEST(Helpers, LogSpacedCounts) {
    const auto c = log_spaced_counts(10, 1000000, 4, false);
    EXPECT_EQ(c.front(), 10u);
    EXPECT_EQ(c.back(), 1000000u);
    EXPECT_EQ(c.size(), 21u);
    for (std::size_t i = 1; i < c.size(); ++i)
        EXPECT_GT(c[i], c[i - 1]);
    for (auto v : log_spaced_counts(10, 100000, 5, true))
        EXPECT_EQ(v % 2, 1u);
    EXPECT_ERROR_CODE(log_spaced_counts(0, 10, 2, false), ErrorCode::config);
}

TEST(SlopeFit, RecoversOrderBeforeFloor) {
    const auto s   = synthetic_series(2.0, 1e-6);
    const auto fit = fit_convergence_slope(s);
    ASSERT_TRUE(fit.valid);
    EXPECT_NEAR(fit.slope, 2.0, 1e-12);
    EXPECT_EQ(fit.first, 0u);
    // 3 n^-2 >= 1e-5 up to n = 547
    EXPECT_EQ(s[fit.last].pts, 316u);
}

TEST(SlopeFit, WithoutFloorUsesWholeSeries) {
    const auto s   = synthetic_series(4.0, 0.0);
    const auto fit = fit_convergence_slope(s);
    ASSERT_TRUE(fit.valid);
    EXPECT_NEAR(fit.slope, 4.0, 1e-12);
    EXPECT_EQ(fit.last, s.size() - 1);
    EXPECT_NEAR(fit.decades, std::log10(3162.0 / 10.0), 1e-12);
}

TEST(SlopeFit, PicksLongestMonotoneRun) {
    auto s      = synthetic_series(2.0, 0.0);
    s[2].error  = s[3].error * 0.9; // dip that breaks monotonicity early
    const auto fit = fit_convergence_slope(s);
    ASSERT_TRUE(fit.valid);
    EXPECT_EQ(fit.first, 3u);
    EXPECT_NEAR(fit.slope, 2.0, 1e-12);
    EXPECT_FALSE(fit_convergence_slope(std::vector<ConvergencePoint>(1)).valid);
}

TEST(Table1, RowsAndFormatting) {
    const auto f32 = table1_row(Precision::fp32), f64 = table1_row(Precision::fp64);
    ASSERT_EQ(f32.size(), 12u);
    ASSERT_EQ(f64.size(), 12u);
    for (std::size_t i = 0; i < 12; ++i)
        EXPECT_GT(f32[i], f64[i]);
    const std::string text = format_table1();
    EXPECT_NE(text.find("9.919"), std::string::npos);
    EXPECT_NE(text.find("2e-04"), std::string::npos);
    const Precision only[] = {Precision::fp64};
    EXPECT_EQ(format_table1(only).find("fp32"), std::string::npos);
}

TEST(Bench, LinearFitAndRandomSystems) {
    const std::vector<double> x{1, 2, 3, 4}, y{3, 5, 7, 9};
    const auto fit = fit_linear(x, y);
    EXPECT_NEAR(fit.slope, 2.0, 1e-14);
    EXPECT_NEAR(fit.intercept, 1.0, 1e-14);
    EXPECT_NEAR(fit.max_relative_residual, 0.0, 1e-14);

    std::mt19937_64 rng(82);
    const auto h = random_hermitian(5, rng);
    EXPECT_EQ(hermitian_defect(h), 0.0);

    const std::size_t dims[] = {2}, pts[] = {100, 200};
    const auto rows = run_bench(dims, pts, Precision::fp64, 1, 7);
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[1].pts, 200u);
    EXPECT_GT(rows[1].seconds, 0.0);
}

TEST(Convergence, SweepReportsDiagnostics) {
    const DrivenQubit q;
    const std::size_t pts[] = {101, 1001};
    const auto s = convergence_sweep(q, pts, PropagationMode{true, Quadrature::simpson, Precision::fp64});
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0].slices, 50u);
    EXPECT_GT(s[0].error, s[1].error * 1000); // fourth order over one decade
    EXPECT_LE(s[1].unitarity, 1e-12);
    EXPECT_LE(s[1].trace_error, 1e-12);
}
