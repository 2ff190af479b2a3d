#include <chebprop/magnus.hpp>

namespace chebprop {

EffectiveSystem::EffectiveSystem(ControlSystem base) : base_(std::move(base)) {
    const auto &h     = base_.controls();
    const auto &drift = base_.drift();
    const std::size_t n = h.size();
    const cplx<double> i_unit{0, 1};

    effective_.reserve(effective_control_count(n));
    effective_.insert(effective_.end(), h.begin(), h.end());
    for (std::size_t k = 0; k < n; ++k)
        effective_.push_back(i_unit * commutator(drift, h[k]));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t l = k + 1; l < n; ++l)
            effective_.push_back(i_unit * commutator(h[k], h[l]));

    norms_.push_back(base_.norms().front());
    for (const auto &m : effective_)
        norms_.push_back(one_norm(m));
}

std::vector<Matrix<double>> EffectiveSystem::basis() const {
    std::vector<Matrix<double>> out;
    out.reserve(effective_.size() + 1);
    out.push_back(base_.drift());
    out.insert(out.end(), effective_.begin(), effective_.end());
    return out;
}

EffectiveSystem build_effective_system(const ControlSystem &system) {
    return EffectiveSystem(system);
}

template <Real T>
CoefficientTable<T> magnus_coefficients(const ControlAmplitudes &amps) {
    const std::size_t n = amps.controls(), steps = slice_count(amps.pts(), Quadrature::simpson);
    const T dt          = static_cast<T>(amps.dt());
    const T dt2_3       = dt * dt / 3;
    CoefficientTable<T> table(steps, 1 + effective_control_count(n));
    for (std::size_t j = 0; j < steps; ++j) {
        auto c1 = [&](std::size_t k) { return static_cast<T>(amps(2 * j, k)); };
        auto c2 = [&](std::size_t k) { return static_cast<T>(amps(2 * j + 1, k)); };
        auto c3 = [&](std::size_t k) { return static_cast<T>(amps(2 * j + 2, k)); };

        std::size_t col = 0;
        table(j, col++) = 2 * dt;
        for (std::size_t k = 0; k < n; ++k)
            table(j, col++) = dt * (c1(k) / 3 + 4 * c2(k) / 3 + c3(k) / 3);
        for (std::size_t k = 0; k < n; ++k)
            table(j, col++) = dt2_3 * (c3(k) - c1(k));
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t l = k + 1; l < n; ++l)
                table(j, col++) = dt2_3 * (c1(k) * c3(l) - c3(k) * c1(l));
    }
    return table;
}

double magnus_spectral_bound(const EffectiveSystem &eff, const ControlAmplitudes &amps) {
    const std::size_t n = eff.base().control_count();
    const auto &norms   = eff.norms(); // [H_0, H_1..H_N, drift commutators, cross commutators]
    const double dt     = amps.dt();
    double plain = 0, commutators = 0;
    for (std::size_t i = 0; i <= n; ++i)
        plain += norms[i];
    for (std::size_t i = n + 1; i < norms.size(); ++i)
        commutators += norms[i];
    return 2 * dt * plain + 2 * dt * dt / 3 * commutators;
}

template CoefficientTable<float> magnus_coefficients<float>(const ControlAmplitudes &);
template CoefficientTable<double> magnus_coefficients<double>(const ControlAmplitudes &);

} // namespace chebprop
