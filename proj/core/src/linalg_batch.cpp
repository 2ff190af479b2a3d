#include <chebprop/linalg_batch.hpp>

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <functional>
#include <limits>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace chebprop {

namespace {

template <class P>
std::uintptr_t addr(P *p) {
    return reinterpret_cast<std::uintptr_t>(p);
}

template <class T>
bool overlaps(ConstBatchView<T> a, ConstBatchView<T> b) {
    if (a.count == 0 || b.count == 0)
        return false;
    const auto a0 = addr(a.base), a1 = addr(a.base + a.footprint());
    const auto b0 = addr(b.base), b1 = addr(b.base + b.footprint());
    return a0 < b1 && b0 < a1;
}

template <class T>
void check_view(ConstBatchView<T> v, const char *name) {
    if (v.count > 0 && (v.dim == 0 || v.stride < v.dim * v.dim || v.base == nullptr))
        throw Error(ErrorCode::shape, std::string("invalid batch view ") + name);
}

// Interleaved (re, im) access; std::complex<T> is layout-compatible with T[2].
template <class T>
const T *raw(const cplx<T> *p) {
    return reinterpret_cast<const T *>(p);
}
template <class T>
T *raw(cplx<T> *p) {
    return reinterpret_cast<T *>(p);
}

template <class T>
void gemm_one(const T *a, const T *b, T ar, T ai, T br, T bi, bool beta_zero, T *c, std::size_t d) {
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            T sr = 0, si = 0;
            for (std::size_t l = 0; l < d; ++l) {
                const T xr = a[2 * (i * d + l)], xi = a[2 * (i * d + l) + 1];
                const T yr = b[2 * (l * d + j)], yi = b[2 * (l * d + j) + 1];
                sr += xr * yr - xi * yi;
                si += xr * yi + xi * yr;
            }
            T *out = c + 2 * (i * d + j);
            T rr   = ar * sr - ai * si;
            T ri   = ar * si + ai * sr;
            if (!beta_zero) {
                rr += br * out[0] - bi * out[1];
                ri += br * out[1] + bi * out[0];
            }
            out[0] = rr;
            out[1] = ri;
        }
    }
}

} // namespace

template <class T>
MatrixBatch<T>::MatrixBatch(std::size_t dim, std::size_t count, std::size_t stride)
    : dim_(dim), count_(count), stride_(stride) {
    if (dim == 0)
        throw Error(ErrorCode::shape, "batch dimension must be >= 1");
    if (stride < dim * dim)
        throw Error(ErrorCode::shape, "batch stride must be >= dim*dim");
    data_.assign(storage_size(), cplx<T>{});
}

template <class T>
void MatrixBatch<T>::reshape(std::size_t dim, std::size_t count) {
    if (dim == 0)
        throw Error(ErrorCode::shape, "batch dimension must be >= 1");
    dim_    = dim;
    count_  = count;
    stride_ = dim * dim;
    if (data_.size() < storage_size())
        data_.resize(storage_size());
}

template <class T>
void MatrixBatch<T>::fill_zero() {
    std::fill(data_.begin(), data_.begin() + static_cast<std::ptrdiff_t>(storage_size()), cplx<T>{});
}

template <class T>
Matrix<T> MatrixBatch<T>::get(std::size_t k) const {
    if (k >= count_)
        throw Error(ErrorCode::out_of_range, "batch index " + std::to_string(k) + " >= " + std::to_string(count_));
    Matrix<T> m(dim_);
    std::copy_n(data_.data() + k * stride_, dim_ * dim_, m.data());
    return m;
}

template <class T>
void MatrixBatch<T>::set(std::size_t k, const Matrix<T> &m) {
    if (k >= count_)
        throw Error(ErrorCode::out_of_range, "batch index " + std::to_string(k) + " >= " + std::to_string(count_));
    if (m.dim() != dim_)
        throw Error(ErrorCode::shape, "matrix dimension does not match batch");
    std::copy_n(m.data(), dim_ * dim_, data_.data() + k * stride_);
}

template <class T>
double one_norm(ConstMatrixView<T> m) {
    double best = 0;
    for (std::size_t c = 0; c < m.dim; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < m.dim; ++r)
            s += std::abs(m(r, c));
        best = std::max(best, s);
    }
    return best;
}

CpuBackend::CpuBackend(BackendConfig config) : threads_(config.threads) {
    if (config.threads < 0)
        throw Error(ErrorCode::config, "thread count must be >= 0");
#ifdef _OPENMP
    if (threads_ == 0)
        threads_ = omp_get_max_threads();
#else
    threads_ = 1;
#endif
}

BackendCapabilities CpuBackend::capabilities() const noexcept {
    return {std::numeric_limits<std::int64_t>::max() / 2, true, true, threads_};
}

template <Real T>
void CpuBackend::gemm_strided_batched(ConstBatchView<T> a, ConstBatchView<T> b, cplx<T> alpha, cplx<T> beta,
                                      BatchView<T> c) const {
    check_view(a, "A");
    check_view(b, "B");
    check_view<T>(c, "C");
    if (a.dim != c.dim || b.dim != c.dim)
        throw Error(ErrorCode::shape, "gemm dimension mismatch");
    if (a.count != c.count || b.count != c.count)
        throw Error(ErrorCode::shape, "gemm batch count mismatch");
    if (overlaps<T>(a, c) || overlaps<T>(b, c))
        throw Error(ErrorCode::aliasing, "gemm output overlaps an input");
    ++counters_.gemm_calls;

    const auto n            = static_cast<std::int64_t>(c.count);
    const std::size_t d     = c.dim;
    const bool beta_zero    = beta == cplx<T>{};
    const T ar = alpha.real(), ai = alpha.imag(), br = beta.real(), bi = beta.imag();
#pragma omp parallel for schedule(static) num_threads(threads_) if (n > 64)
    for (std::int64_t k = 0; k < n; ++k) {
        gemm_one(raw(a.matrix(k)), raw(b.matrix(k)), ar, ai, br, bi, beta_zero, raw(c.matrix(k)), d);
    }
}

template <Real T>
void CpuBackend::diagonal_add_batched(BatchView<T> c, cplx<T> a) const {
    check_view<T>(c, "C");
    ++counters_.diagonal_add_calls;
    const auto n        = static_cast<std::int64_t>(c.count);
    const std::size_t d = c.dim;
#pragma omp parallel for schedule(static) num_threads(threads_) if (n > 1024)
    for (std::int64_t k = 0; k < n; ++k) {
        cplx<T> *m = c.matrix(k);
        for (std::size_t i = 0; i < d; ++i)
            m[i * d + i] += a;
    }
}

template <Real T>
void CpuBackend::copy_matrix(ConstBatchView<T> src, std::size_t src_index, BatchView<T> dst,
                             std::size_t dst_index) const {
    if (src.dim != dst.dim)
        throw Error(ErrorCode::shape, "copy dimension mismatch");
    if (src_index >= src.count || dst_index >= dst.count)
        throw Error(ErrorCode::out_of_range, "copy index out of range");
    ++counters_.copy_calls;
    std::memmove(dst.matrix(dst_index), src.matrix(src_index), sizeof(cplx<T>) * src.dim * src.dim);
}

template <Real T>
void CpuBackend::expand_linear_combination(std::span<const Matrix<T>> basis, const CoefficientTable<T> &coeffs,
                                           T scale, MatrixBatch<T> &out) const {
    if (basis.empty())
        throw Error(ErrorCode::shape, "expansion needs at least the drift matrix");
    const std::size_t d = basis.front().dim();
    for (const auto &h : basis)
        if (h.dim() != d)
            throw Error(ErrorCode::shape, "expansion basis dimension mismatch");
    if (coeffs.cols != basis.size())
        throw Error(ErrorCode::shape, "coefficient table has " + std::to_string(coeffs.cols) + " columns, basis has " +
                                          std::to_string(basis.size()) + " matrices");
    ++counters_.expand_calls;

    // Flattened basis: terms x (2 d^2) real scalars.
    const std::size_t terms = basis.size();
    const std::size_t width = 2 * d * d;
    std::vector<T> flat(terms * width);
    for (std::size_t i = 0; i < terms; ++i)
        std::copy_n(raw(basis[i].data()), width, flat.data() + i * width);

    out.reshape(d, coeffs.rows);
    const auto n = static_cast<std::int64_t>(coeffs.rows);
#pragma omp parallel for schedule(static) num_threads(threads_) if (n > 256)
    for (std::int64_t k = 0; k < n; ++k) {
        T *dst = raw(out.view().matrix(k));
        std::fill_n(dst, width, T(0));
        for (std::size_t i = 0; i < terms; ++i) {
            const T w = coeffs(k, i);
            if (w == T(0))
                continue;
            const T *src = flat.data() + i * width;
            for (std::size_t e = 0; e < width; ++e)
                dst[e] += w * src[e];
        }
        for (std::size_t e = 0; e < width; ++e)
            dst[e] *= scale;
    }
}

#define CHEBPROP_INSTANTIATE(T)                                                                                     \
    template class MatrixBatch<T>;                                                                                  \
    template double one_norm<T>(ConstMatrixView<T>);                                                                \
    template void CpuBackend::gemm_strided_batched<T>(ConstBatchView<T>, ConstBatchView<T>, cplx<T>, cplx<T>,       \
                                                      BatchView<T>) const;                                          \
    template void CpuBackend::diagonal_add_batched<T>(BatchView<T>, cplx<T>) const;                                 \
    template void CpuBackend::copy_matrix<T>(ConstBatchView<T>, std::size_t, BatchView<T>, std::size_t) const;      \
    template void CpuBackend::expand_linear_combination<T>(std::span<const Matrix<T>>, const CoefficientTable<T> &, \
                                                           T, MatrixBatch<T> &) const;

CHEBPROP_INSTANTIATE(float)
CHEBPROP_INSTANTIATE(double)

#undef CHEBPROP_INSTANTIATE

} // namespace chebprop
