#include <chebprop/studies.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

namespace chebprop {

namespace {

using C = cplx<double>;

Matrix<double> pauli_x() { return {{0, 1}, {1, 0}}; }
Matrix<double> pauli_y() { return {{0, C(0, -1)}, {C(0, 1), 0}}; }
Matrix<double> pauli_z() { return {{1, 0}, {0, -1}}; }

// exp(-i tau (hx sx + hy sy + hz sz))
Matrix<double> su2_exp(double hx, double hy, double hz, double tau) {
    const double norm = std::sqrt(hx * hx + hy * hy + hz * hz);
    const double c    = std::cos(norm * tau);
    const double s    = norm == 0 ? 0.0 : std::sin(norm * tau) / norm;
    const C mi(0, -1);
    return {{C(c, 0) + mi * s * hz, mi * s * C(hx, -hy)}, {mi * s * C(hx, hy), C(c, 0) - mi * s * hz}};
}

} // namespace

ControlSystem driven_qubit_system(const DrivenQubit &q) {
    return ControlSystem(C(q.omega0 / 2) * pauli_z(), {C(q.omega1 / 2) * pauli_x(), C(q.omega1 / 2) * pauli_y()});
}

ControlAmplitudes driven_qubit_amplitudes(const DrivenQubit &q, std::size_t pts, Quadrature quadrature) {
    double dt = 0, offset = 0;
    if (quadrature == Quadrature::midpoint) {
        if (pts == 0)
            throw Error(ErrorCode::sampling_parity, "need at least one sample");
        dt     = q.duration / static_cast<double>(pts);
        offset = 0.5;
    } else {
        slice_count(pts, quadrature);
        dt = q.duration / static_cast<double>(pts - 1);
    }
    std::vector<double> values(2 * pts);
    for (std::size_t k = 0; k < pts; ++k) {
        const double t    = (static_cast<double>(k) + offset) * dt;
        values[2 * k]     = std::cos(q.omega_rf * t);
        values[2 * k + 1] = std::sin(q.omega_rf * t);
    }
    return ControlAmplitudes(pts, 2, dt, std::move(values));
}

Matrix<double> driven_qubit_exact(const DrivenQubit &q, double t) {
    const Matrix<double> frame = su2_exp(0, 0, q.omega_rf / 2, t);
    const Matrix<double> rot   = su2_exp(q.omega1 / 2, 0, (q.omega0 - q.omega_rf) / 2, t);
    return frame * rot;
}

Matrix<double> driven_qubit_reference(const DrivenQubit &q, std::size_t steps) {
    if (steps == 0)
        return Matrix<double>::identity(2);
    const double dt  = q.duration / static_cast<double>(steps);
    Matrix<double> U = Matrix<double>::identity(2);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t = (static_cast<double>(k) + 0.5) * dt;
        U = su2_exp(q.omega1 / 2 * std::cos(q.omega_rf * t), q.omega1 / 2 * std::sin(q.omega_rf * t), q.omega0 / 2, dt) *
            U;
    }
    return U;
}

double unitarity_defect(const Matrix<double> &U) {
    return one_norm(adjoint(U) * U - Matrix<double>::identity(U.dim()));
}

cplx<double> determinant(Matrix<double> m) {
    const std::size_t d = m.dim();
    C det(1, 0);
    for (std::size_t col = 0; col < d; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < d; ++r)
            if (std::abs(m(r, col)) > std::abs(m(piv, col)))
                piv = r;
        if (m(piv, col) == C{})
            return C{};
        if (piv != col) {
            for (std::size_t c = 0; c < d; ++c)
                std::swap(m(piv, c), m(col, c));
            det = -det;
        }
        det *= m(col, col);
        for (std::size_t r = col + 1; r < d; ++r) {
            const C f = m(r, col) / m(col, col);
            for (std::size_t c = col; c < d; ++c)
                m(r, c) -= f * m(col, c);
        }
    }
    return det;
}

Matrix<double> phase_align(const Matrix<double> &U, const Matrix<double> &reference) {
    const double phi = std::arg(determinant(reference) / determinant(U)) / static_cast<double>(U.dim());
    return std::polar(1.0, phi) * U;
}

std::string describe(const PropagationMode &mode) {
    std::string s = mode.magnus ? "magnus" : std::string(to_string(mode.quadrature));
    return s + "/" + std::string(to_string(mode.precision));
}

std::vector<std::size_t> log_spaced_counts(std::size_t lo, std::size_t hi, int per_decade, bool odd) {
    if (lo == 0 || hi < lo || per_decade < 1)
        throw Error(ErrorCode::config, "invalid log-spaced range");
    std::vector<std::size_t> out;
    const double l0 = std::log10(static_cast<double>(lo)), l1 = std::log10(static_cast<double>(hi));
    const int n     = static_cast<int>(std::round((l1 - l0) * per_decade));
    for (int i = 0; i <= n; ++i) {
        auto v = static_cast<std::size_t>(std::llround(std::pow(10.0, l0 + (n == 0 ? 0.0 : (l1 - l0) * i / n))));
        if (odd && v % 2 == 0)
            ++v;
        if (odd && v < 3)
            v = 3;
        if (out.empty() || v > out.back())
            out.push_back(v);
    }
    return out;
}

std::vector<ConvergencePoint> convergence_sweep(const DrivenQubit &q, std::span<const std::size_t> pts,
                                                const PropagationMode &mode, bool align_phase) {
    Integrator integrator(IntegratorConfig{mode.precision, {}, false});
    const Quadrature quad = mode.magnus ? Quadrature::simpson : mode.quadrature;
    integrator.set_hamiltonian(driven_qubit_system(q), mode.magnus, quad);
    const Matrix<double> exact = driven_qubit_exact(q, q.duration);
    const Matrix<double> rho0{{1, 0}, {0, 0}};

    std::vector<ConvergencePoint> out;
    out.reserve(pts.size());
    for (std::size_t p : pts) {
        const PropagatorResult r = integrator.equiprop(driven_qubit_amplitudes(q, p, quad));
        const Matrix<double> U   = align_phase ? phase_align(r.U, exact) : r.U;
        ConvergencePoint pt;
        pt.pts         = p;
        pt.slices      = r.slice_count;
        pt.error       = max_abs_diff(U, exact);
        pt.unitarity   = unitarity_defect(r.U);
        pt.trace_error = std::abs(trace(apply(r, rho0)) - trace(rho0));
        pt.m_max       = r.plan.m_max;
        out.push_back(pt);
    }
    return out;
}

SlopeFit fit_convergence_slope(std::span<const ConvergencePoint> series, double floor_margin) {
    SlopeFit fit;
    if (series.size() < 2)
        return fit;
    const auto min_it      = std::ranges::min_element(series, {}, &ConvergencePoint::error);
    const std::size_t imin = static_cast<std::size_t>(min_it - series.begin());
    // A minimum in the interior marks the rounding floor; one at the very end
    // means the sweep never reached it.
    const double floor = imin + 1 < series.size() ? min_it->error : 0.0;

    std::size_t best_first = 0, best_last = 0, run_first = 0;
    bool in_run = false;
    for (std::size_t i = 0; i <= imin; ++i) {
        const bool above = series[i].error > floor_margin * floor && series[i].error > 0;
        const bool dec   = i == 0 || series[i].error < series[i - 1].error;
        if (!above) {
            in_run = false;
            continue;
        }
        if (!in_run || !dec) {
            run_first = i;
            in_run    = true;
        }
        if (i - run_first > best_last - best_first)
            best_first = run_first, best_last = i;
    }
    if (best_last == best_first)
        return fit;

    // error ~ dt^p and dt ~ 1/slices, so regress log(error) on -log(slices).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const auto n = static_cast<double>(best_last - best_first + 1);
    for (std::size_t i = best_first; i <= best_last; ++i) {
        const double x = -std::log10(static_cast<double>(series[i].slices));
        const double y = std::log10(series[i].error);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    fit.valid     = true;
    fit.slope     = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / n;
    fit.first     = best_first;
    fit.last      = best_last;
    fit.decades   = std::log10(static_cast<double>(series[best_last].slices) / static_cast<double>(series[best_first].slices));
    return fit;
}

std::vector<double> table1_row(Precision precision) {
    std::vector<double> row;
    for (int m = min_chebyshev_order; m <= max_chebyshev_order; m += 2)
        row.push_back(max_norm_for_order(m, precision));
    return row;
}

std::string format_table1(std::span<const Precision> rows) {
    std::ostringstream out;
    out << std::left << std::setw(12) << "m_max";
    for (int m = min_chebyshev_order; m <= max_chebyshev_order; m += 2)
        out << std::setw(9) << m;
    out << '\n';
    for (Precision p : rows) {
        out << std::setw(12) << ("||G|| " + std::string(to_string(p)));
        for (double v : table1_row(p)) {
            std::ostringstream cell;
            if (v < 0.001)
                cell << std::setprecision(0) << std::scientific << v;
            else
                cell << std::fixed << std::setprecision(3) << v;
            out << std::setw(9) << cell.str();
        }
        out << '\n';
    }
    return out.str();
}

std::string format_table1() {
    const Precision both[] = {Precision::fp32, Precision::fp64};
    return format_table1(both);
}

Matrix<double> random_hermitian(std::size_t dim, std::mt19937_64 &rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix<double> h(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        h(i, i) = u(rng);
        for (std::size_t j = i + 1; j < dim; ++j) {
            C z;
            do
                z = C(u(rng), u(rng));
            while (std::abs(z) > 1);
            h(i, j) = z;
            h(j, i) = std::conj(z);
        }
    }
    return h;
}

std::vector<BenchPoint> run_bench(std::span<const std::size_t> dims, std::span<const std::size_t> pts,
                                  Precision precision, int repeats, std::uint64_t seed) {
    if (repeats < 1)
        throw Error(ErrorCode::config, "repeats must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<BenchPoint> out;
    for (std::size_t d : dims) {
        ControlSystem sys(random_hermitian(d, rng), {random_hermitian(d, rng), random_hermitian(d, rng)});
        double total_norm = 0;
        for (double n : sys.norms())
            total_norm += n;
        // Keeps every slice exponent at ||G|| <= 0.5.
        const double dt = 0.5 / total_norm;
        Integrator integrator(IntegratorConfig{precision, {}, false});
        integrator.set_hamiltonian(sys);
        for (std::size_t p : pts) {
            std::vector<double> values(2 * p);
            for (auto &v : values)
                v = u(rng);
            const ControlAmplitudes amps(p, 2, dt, std::move(values));
            integrator.equiprop(amps); // warm-up: sizes the workspace
            std::vector<double> times;
            for (int r = 0; r < repeats; ++r) {
                const auto t0 = std::chrono::steady_clock::now();
                integrator.equiprop(amps);
                times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
            }
            std::ranges::nth_element(times, times.begin() + static_cast<std::ptrdiff_t>(times.size() / 2));
            out.push_back({d, p, times[times.size() / 2]});
        }
    }
    return out;
}

LinearFit fit_linear(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw Error(ErrorCode::shape, "linear fit needs >= 2 paired samples");
    // Weights 1/y^2 turn the objective into the sum of squared relative residuals.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(y[i] > 0))
            throw Error(ErrorCode::domain, "linear fit needs positive samples");
        const double w = 1.0 / (y[i] * y[i]);
        sw += w;
        sx += w * x[i];
        sy += w * y[i];
        sxx += w * x[i] * x[i];
        sxy += w * x[i] * y[i];
    }
    LinearFit fit;
    fit.slope     = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    fit.intercept = (sy - fit.slope * sx) / sw;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double model        = fit.intercept + fit.slope * x[i];
        fit.max_relative_residual = std::max(fit.max_relative_residual, std::abs(y[i] - model) / y[i]);
    }
    return fit;
}

} // namespace chebprop
