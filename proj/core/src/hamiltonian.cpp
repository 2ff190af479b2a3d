#include <chebprop/hamiltonian.hpp>

#include <cmath>
#include <sstream>
#include <string>

namespace chebprop {

namespace {

void check_hermitian(const Matrix<double> &h, const std::string &name) {
    const double defect = hermitian_defect(h);
    if (defect > 1e-12 * one_norm(h)) {
        std::ostringstream msg;
        msg << name << " is not Hermitian (max |H_ij - conj(H_ji)| = " << defect << ")";
        throw Error(ErrorCode::hermiticity, msg.str());
    }
}

} // namespace

ControlSystem::ControlSystem(Matrix<double> drift, std::vector<Matrix<double>> controls)
    : drift_(std::move(drift)), controls_(std::move(controls)) {
    if (drift_.dim() == 0)
        throw Error(ErrorCode::shape, "drift Hamiltonian must be at least 1x1");
    check_hermitian(drift_, "drift Hamiltonian");
    norms_.push_back(one_norm(drift_));
    for (std::size_t i = 0; i < controls_.size(); ++i) {
        if (controls_[i].dim() != drift_.dim())
            throw Error(ErrorCode::shape, "control Hamiltonian " + std::to_string(i + 1) + " has dimension " +
                                              std::to_string(controls_[i].dim()) + ", drift has " +
                                              std::to_string(drift_.dim()));
        check_hermitian(controls_[i], "control Hamiltonian " + std::to_string(i + 1));
        norms_.push_back(one_norm(controls_[i]));
    }
}

std::vector<Matrix<double>> ControlSystem::basis() const {
    std::vector<Matrix<double>> out;
    out.reserve(controls_.size() + 1);
    out.push_back(drift_);
    out.insert(out.end(), controls_.begin(), controls_.end());
    return out;
}

ControlAmplitudes::ControlAmplitudes(std::size_t pts, std::size_t controls, double dt, std::vector<double> values)
    : pts_(pts), controls_(controls), dt_(dt), values_(std::move(values)) {
    if (!(dt > 0) || !std::isfinite(dt))
        throw Error(ErrorCode::config, "time step must be finite and > 0");
    if (values_.size() != pts * controls)
        throw Error(ErrorCode::shape, "amplitude table holds " + std::to_string(values_.size()) + " values, expected " +
                                          std::to_string(pts) + " x " + std::to_string(controls));
}

ControlAmplitudes::ControlAmplitudes(std::size_t pts, double dt) : ControlAmplitudes(pts, 0, dt, {}) {}

Quadrature parse_quadrature(std::string_view token) {
    if (token == "midpoint")
        return Quadrature::midpoint;
    if (token == "simpson")
        return Quadrature::simpson;
    throw Error(ErrorCode::config, "unknown quadrature '" + std::string(token) + "' (expected midpoint or simpson)");
}

std::string_view to_string(Quadrature q) noexcept {
    return q == Quadrature::midpoint ? "midpoint" : "simpson";
}

double spectral_bound(const ControlSystem &system, double dt) {
    double sum = 0;
    for (double n : system.norms())
        sum += n;
    return dt * sum;
}

std::optional<AmplitudeViolation> validate_amplitudes(const ControlAmplitudes &amps) {
    for (std::size_t k = 0; k < amps.pts(); ++k)
        for (std::size_t i = 0; i < amps.controls(); ++i) {
            const double v = amps(k, i);
            if (!(v >= -1.0 && v <= 1.0))
                return AmplitudeViolation{k, i, v};
        }
    return std::nullopt;
}

void require_valid_amplitudes(const ControlAmplitudes &amps) {
    if (auto bad = validate_amplitudes(amps)) {
        std::ostringstream msg;
        msg << "amplitude c_" << bad->control + 1 << "(t_" << bad->sample << ") = " << bad->value
            << " lies outside [-1, 1]; rescale the control Hamiltonian instead";
        throw Error(ErrorCode::amplitude_bound, msg.str());
    }
}

std::size_t slice_count(std::size_t pts, Quadrature quadrature) {
    if (quadrature == Quadrature::midpoint || pts == 0)
        return pts;
    if (pts < 3 || pts % 2 == 0)
        throw Error(ErrorCode::sampling_parity,
                    "Simpson sampling needs an odd number (>= 3) of samples, got " + std::to_string(pts));
    return (pts - 1) / 2;
}

template <Real T>
CoefficientTable<T> exponent_coefficients(const ControlAmplitudes &amps, Quadrature quadrature) {
    const std::size_t n = amps.controls(), slices = slice_count(amps.pts(), quadrature);
    const T dt          = static_cast<T>(amps.dt());
    CoefficientTable<T> table(slices, n + 1);
    for (std::size_t s = 0; s < slices; ++s) {
        if (quadrature == Quadrature::midpoint) {
            table(s, 0) = dt;
            for (std::size_t i = 0; i < n; ++i)
                table(s, i + 1) = dt * static_cast<T>(amps(s, i));
        } else {
            table(s, 0) = 2 * dt;
            for (std::size_t i = 0; i < n; ++i) {
                const T c1 = static_cast<T>(amps(2 * s, i)), c2 = static_cast<T>(amps(2 * s + 1, i)),
                        c3 = static_cast<T>(amps(2 * s + 2, i));
                table(s, i + 1) = dt * (c1 / 3 + 4 * c2 / 3 + c3 / 3);
            }
        }
    }
    return table;
}

template <Real T>
std::vector<Matrix<T>> upload(const std::vector<Matrix<double>> &matrices) {
    std::vector<Matrix<T>> out;
    out.reserve(matrices.size());
    for (const auto &m : matrices)
        out.push_back(m.cast<T>());
    return out;
}

template <Real T>
MatrixBatch<T> build_exponent_batch(const CpuBackend &backend, const ControlSystem &system,
                                    const ControlAmplitudes &amps, Quadrature quadrature) {
    if (amps.controls() != system.control_count())
        throw Error(ErrorCode::shape, "amplitude table has " + std::to_string(amps.controls()) +
                                          " controls, system has " + std::to_string(system.control_count()));
    require_valid_amplitudes(amps);
    const auto basis = upload<T>(system.basis());
    MatrixBatch<T> out(system.dim(), 0);
    backend.expand_linear_combination<T>(basis, exponent_coefficients<T>(amps, quadrature), T(1), out);
    return out;
}

template CoefficientTable<float> exponent_coefficients<float>(const ControlAmplitudes &, Quadrature);
template CoefficientTable<double> exponent_coefficients<double>(const ControlAmplitudes &, Quadrature);
template std::vector<Matrix<float>> upload<float>(const std::vector<Matrix<double>> &);
template std::vector<Matrix<double>> upload<double>(const std::vector<Matrix<double>> &);
template MatrixBatch<float> build_exponent_batch<float>(const CpuBackend &, const ControlSystem &,
                                                        const ControlAmplitudes &, Quadrature);
template MatrixBatch<double> build_exponent_batch<double>(const CpuBackend &, const ControlSystem &,
                                                          const ControlAmplitudes &, Quadrature);

} // namespace chebprop
