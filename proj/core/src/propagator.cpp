#include <chebprop/propagator.hpp>

#include <algorithm>
#include <string>
#include <utility>
#include <variant>

namespace chebprop {

IntegratorConfig make_config(std::string_view precision, int threads) {
    IntegratorConfig cfg;
    if (threads < 0)
        throw Error(ErrorCode::config, "thread count must be >= 0");
    cfg.precision       = parse_precision(precision);
    cfg.backend.threads = threads;
    return cfg;
}

template <Real T>
Matrix<T> reduce_pairwise(const CpuBackend &backend, BatchView<T> batch, BatchView<T> scratch) {
    if (batch.count == 0)
        return Matrix<T>::identity(std::max<std::size_t>(batch.dim, 1));
    if (scratch.dim != batch.dim || scratch.count < (batch.count + 1) / 2)
        throw Error(ErrorCode::shape, "reduction scratch too small");

    BatchView<T> read = batch, write = scratch;
    std::size_t remain = batch.count;
    while (remain > 1) {
        const std::size_t pairs = remain / 2, pad = remain % 2;
        // Later slice on the left: out[j] = U[2j+1] * U[2j].
        backend.gemm_strided_batched<T>(read.strided(1, 2, pairs), read.strided(0, 2, pairs), T(1), T(0),
                                        write.head(pairs));
        if (pad > 0)
            backend.copy_matrix<T>(read.head(remain), remain - 1, write.head(pairs + 1), pairs);
        remain = pairs + pad;
        std::swap(read, write);
    }
    Matrix<T> out(batch.dim);
    std::copy_n(read.matrix(0), batch.dim * batch.dim, out.data());
    return out;
}

template <Real T>
Matrix<T> reduce_pairwise(const CpuBackend &backend, const MatrixBatch<T> &batch) {
    if (batch.count() == 0)
        return Matrix<T>::identity(std::max<std::size_t>(batch.dim(), 1));
    MatrixBatch<T> work(batch.dim(), batch.count());
    for (std::size_t k = 0; k < batch.count(); ++k)
        std::copy_n(batch.view().matrix(k), batch.dim() * batch.dim(), work.view().matrix(k));
    MatrixBatch<T> scratch(batch.dim(), (batch.count() + 1) / 2);
    return reduce_pairwise<T>(backend, work.view(), scratch.view());
}

template <Real T>
Matrix<T> reduce_sequential(const CpuBackend &backend, ConstBatchView<T> batch, BatchView<T> cumulative) {
    const std::size_t d = std::max<std::size_t>(batch.dim, 1);
    if (batch.count == 0)
        return Matrix<T>::identity(d);
    const bool keep = cumulative.count > 0;
    if (keep && (cumulative.count < batch.count || cumulative.dim != batch.dim))
        throw Error(ErrorCode::shape, "cumulative output too small");

    MatrixBatch<T> acc(d, 1), next(d, 1);
    std::copy_n(batch.matrix(0), d * d, acc.view().matrix(0));
    if (keep)
        std::copy_n(batch.matrix(0), d * d, cumulative.matrix(0));
    for (std::size_t k = 1; k < batch.count; ++k) {
        backend.gemm_strided_batched<T>(batch.strided(k, 1, 1), acc.view(), T(1), T(0), next.view());
        std::swap(acc, next);
        if (keep)
            std::copy_n(acc.view().matrix(0), d * d, cumulative.matrix(k));
    }
    return acc.get(0);
}

std::vector<cplx<double>> apply(const Matrix<double> &U, std::span<const cplx<double>> psi) {
    if (psi.size() != U.dim())
        throw Error(ErrorCode::shape, "state vector length does not match propagator dimension");
    std::vector<cplx<double>> out(U.dim());
    for (std::size_t i = 0; i < U.dim(); ++i) {
        cplx<double> acc{};
        for (std::size_t j = 0; j < U.dim(); ++j)
            acc += U(i, j) * psi[j];
        out[i] = acc;
    }
    return out;
}

Matrix<double> apply(const Matrix<double> &U, const Matrix<double> &rho) {
    if (rho.dim() != U.dim())
        throw Error(ErrorCode::shape, "density matrix dimension does not match propagator dimension");
    return U * rho * adjoint(U);
}

// --- Integrator -------------------------------------------------------------

namespace {

template <Real T>
struct Engine {
    using scalar = T;
    std::vector<Matrix<T>> basis; // drift first, then (effective) controls
    ExpmWorkspace<T> ws;
};

template <Real T>
Matrix<double> widen(const Matrix<T> &m) {
    return m.template cast<double>();
}

} // namespace

struct Integrator::Impl {
    IntegratorConfig config;
    CpuBackend backend;
    ContextState state = ContextState::created;
    std::optional<ControlSystem> system;
    std::optional<EffectiveSystem> effective;
    bool magnus           = false;
    Quadrature quadrature = Quadrature::midpoint;
    std::optional<int> m_override;
    std::variant<Engine<float>, Engine<double>> engine;

    explicit Impl(IntegratorConfig cfg) : config(cfg), backend(cfg.backend) {
        if (cfg.precision == Precision::fp32)
            engine.emplace<Engine<float>>();
        else
            engine.emplace<Engine<double>>();
    }

    void require_loaded() const {
        if (state != ContextState::system_loaded)
            throw Error(ErrorCode::state, "no Hamiltonian loaded; call set_hamiltonian() before propagating");
    }

    struct Prepared {
        std::size_t slices;
        PlanSummary plan;
    };

    // Expand and exponentiate all slices; the slice propagators end up in ws.d1.
    template <Real T>
    Prepared exponentiate(Engine<T> &eng, const ControlAmplitudes &amps) {
        require_loaded();
        if (amps.controls() != system->control_count())
            throw Error(ErrorCode::shape, "amplitude table has " + std::to_string(amps.controls()) +
                                              " controls, system has " + std::to_string(system->control_count()));
        require_valid_amplitudes(amps);

        CoefficientTable<T> table;
        double beta = 0;
        if (magnus) {
            table = magnus_coefficients<T>(amps);
            beta  = magnus_spectral_bound(*effective, amps);
        } else {
            table = exponent_coefficients<T>(amps, quadrature);
            beta  = spectral_bound(*system, quadrature == Quadrature::midpoint ? amps.dt() : 2 * amps.dt());
        }
        const ChebyshevPlan plan = make_plan(-beta, beta, config.precision, m_override);
        const PlanSummary summary{plan.m_max, beta, plan.predicted_error};
        if (table.rows == 0)
            return {0, summary};

        // Symmetric interval: X = G / beta, folded into the expansion.
        const T scale = beta > 0 ? static_cast<T>(1.0 / beta) : T(0);
        backend.expand_linear_combination<T>(eng.basis, table, scale, eng.ws.x);
        if (config.checked)
            require_hermitian_batch<T>(eng.ws.x.view());
        expm_normalized<T>(backend, plan, eng.ws);
        return {table.rows, summary};
    }

    template <Real T>
    PropagatorResult propagate(Engine<T> &eng, const ControlAmplitudes &amps, ReductionOrder order) {
        const Prepared prep = exponentiate(eng, amps);
        PropagatorResult result;
        result.slice_count = prep.slices;
        result.plan        = prep.plan;
        result.precision   = config.precision;
        const std::size_t d = system->dim();
        if (prep.slices == 0) {
            result.U = Matrix<double>::identity(d);
            return result;
        }
        if (order == ReductionOrder::pairwise)
            result.U = widen(reduce_pairwise<T>(backend, eng.ws.d1.view(), eng.ws.d0.view()));
        else
            result.U = widen(reduce_sequential<T>(backend, eng.ws.d1.view()));
        return result;
    }

    template <Real T>
    std::vector<Matrix<double>> propagate_all(Engine<T> &eng, const ControlAmplitudes &amps) {
        const Prepared prep = exponentiate(eng, amps);
        std::vector<Matrix<double>> out;
        if (prep.slices == 0)
            return out;
        reduce_sequential<T>(backend, eng.ws.d1.view(), eng.ws.d0.view());
        out.reserve(prep.slices);
        for (std::size_t k = 0; k < prep.slices; ++k)
            out.push_back(widen(eng.ws.d0.get(k)));
        return out;
    }
};

Integrator::Integrator(IntegratorConfig config) : impl_(std::make_unique<Impl>(config)) {}
Integrator::~Integrator()                                = default;
Integrator::Integrator(Integrator &&) noexcept            = default;
Integrator &Integrator::operator=(Integrator &&) noexcept = default;

ContextState Integrator::state() const noexcept {
    return impl_->state;
}
const IntegratorConfig &Integrator::config() const noexcept {
    return impl_->config;
}
const CpuBackend &Integrator::backend() const noexcept {
    return impl_->backend;
}

void Integrator::set_hamiltonian(const ControlSystem &system, bool magnus, Quadrature quadrature) {
    if (magnus && quadrature != Quadrature::simpson)
        throw Error(ErrorCode::config, "Magnus mode needs the three-point (simpson) sampling rule");
    Impl &s = *impl_;
    s.system.emplace(system);
    s.effective.reset();
    if (magnus)
        s.effective.emplace(system);
    s.magnus     = magnus;
    s.quadrature = quadrature;
    const auto basis = magnus ? s.effective->basis() : system.basis();
    std::visit([&](auto &eng) { eng.basis = upload<typename std::decay_t<decltype(eng)>::scalar>(basis); }, s.engine);
    s.state = ContextState::system_loaded;
}

bool Integrator::magnus() const {
    impl_->require_loaded();
    return impl_->magnus;
}

Quadrature Integrator::quadrature() const {
    impl_->require_loaded();
    return impl_->quadrature;
}

std::size_t Integrator::effective_control_count() const {
    impl_->require_loaded();
    return impl_->magnus ? impl_->effective->effective_count() : impl_->system->control_count();
}

void Integrator::set_m_max_override(std::optional<int> m_max) {
    if (m_max && (*m_max < min_chebyshev_order || *m_max > max_chebyshev_order || *m_max % 2 == 0))
        throw Error(ErrorCode::config, "m_max must be odd and within [3, 25]");
    impl_->m_override = m_max;
}

std::optional<int> Integrator::m_max_override() const noexcept {
    return impl_->m_override;
}

PropagatorResult Integrator::equiprop(const ControlAmplitudes &amps, ReductionOrder order) {
    return std::visit([&](auto &eng) { return impl_->propagate(eng, amps, order); }, impl_->engine);
}

std::vector<Matrix<double>> Integrator::equiprop_all(const ControlAmplitudes &amps) {
    return std::visit([&](auto &eng) { return impl_->propagate_all(eng, amps); }, impl_->engine);
}

template Matrix<float> reduce_pairwise<float>(const CpuBackend &, BatchView<float>, BatchView<float>);
template Matrix<double> reduce_pairwise<double>(const CpuBackend &, BatchView<double>, BatchView<double>);
template Matrix<float> reduce_pairwise<float>(const CpuBackend &, const MatrixBatch<float> &);
template Matrix<double> reduce_pairwise<double>(const CpuBackend &, const MatrixBatch<double> &);
template Matrix<float> reduce_sequential<float>(const CpuBackend &, ConstBatchView<float>, BatchView<float>);
template Matrix<double> reduce_sequential<double>(const CpuBackend &, ConstBatchView<double>, BatchView<double>);

} // namespace chebprop
