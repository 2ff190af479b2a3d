/**
 * @file
 * Batched dense complex kernels (the subset of Batched BLAS the integrator
 * needs) and the storage types they operate on.
 *
 * Layout: every matrix is row-major with interleaved (re, im) scalars.
 * A batch is a base pointer, a common edge length `dim`, a `count` and an
 * element `stride` between consecutive matrices (>= dim*dim). Views with a
 * doubled stride and a one-matrix offset expose the odd/even halves of a
 * batch, which is how the pairwise product reduction is expressed.
 */

#pragma once

#include <chebprop/matrix.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace chebprop {

template <class T>
struct ConstBatchView;

/// Mutable strided view over a batch of square matrices.
template <class T>
struct BatchView {
    cplx<T> *base      = nullptr;
    std::size_t dim    = 0;
    std::size_t count  = 0;
    std::size_t stride = 0;

    [[nodiscard]] cplx<T> *matrix(std::size_t k) const { return base + k * stride; }
    /// Number of scalars spanned from the first to the end of the last matrix.
    [[nodiscard]] std::size_t footprint() const { return count == 0 ? 0 : stride * (count - 1) + dim * dim; }
    /// Every `step`-th matrix starting at `first`, `n` of them.
    [[nodiscard]] BatchView strided(std::size_t first, std::size_t step, std::size_t n) const {
        return {base + first * stride, dim, n, stride * step};
    }
    [[nodiscard]] BatchView head(std::size_t n) const { return {base, dim, n, stride}; }
};

template <class T>
struct ConstBatchView {
    const cplx<T> *base = nullptr;
    std::size_t dim     = 0;
    std::size_t count   = 0;
    std::size_t stride  = 0;

    ConstBatchView() = default;
    ConstBatchView(const cplx<T> *b, std::size_t d, std::size_t n, std::size_t s)
        : base(b), dim(d), count(n), stride(s) {}
    ConstBatchView(BatchView<T> v) : base(v.base), dim(v.dim), count(v.count), stride(v.stride) {}

    [[nodiscard]] const cplx<T> *matrix(std::size_t k) const { return base + k * stride; }
    [[nodiscard]] ConstMatrixView<T> matrix_view(std::size_t k) const { return {matrix(k), dim}; }
    [[nodiscard]] std::size_t footprint() const { return count == 0 ? 0 : stride * (count - 1) + dim * dim; }
    [[nodiscard]] ConstBatchView strided(std::size_t first, std::size_t step, std::size_t n) const {
        return {base + first * stride, dim, n, stride * step};
    }
};

/// Owning contiguous batch. Capacity never shrinks, so a batch reused as
/// workspace stops allocating once it has seen its largest problem.
template <class T>
class MatrixBatch {
  public:
    MatrixBatch() = default;
    MatrixBatch(std::size_t dim, std::size_t count) : MatrixBatch(dim, count, dim * dim) {}
    MatrixBatch(std::size_t dim, std::size_t count, std::size_t stride);

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t count() const noexcept { return count_; }
    [[nodiscard]] std::size_t stride() const noexcept { return stride_; }
    [[nodiscard]] Precision precision() const noexcept { return precision_of<T>; }

    /// Reshape to `count` matrices of edge `dim` (dense stride). Contents are unspecified afterwards.
    void reshape(std::size_t dim, std::size_t count);
    void fill_zero();

    [[nodiscard]] BatchView<T> view() noexcept { return {data_.data(), dim_, count_, stride_}; }
    [[nodiscard]] ConstBatchView<T> view() const noexcept { return {data_.data(), dim_, count_, stride_}; }

    [[nodiscard]] Matrix<T> get(std::size_t k) const;
    void set(std::size_t k, const Matrix<T> &m);

    [[nodiscard]] std::span<cplx<T>> elements() noexcept { return {data_.data(), storage_size()}; }
    [[nodiscard]] std::span<const cplx<T>> elements() const noexcept { return {data_.data(), storage_size()}; }

  private:
    [[nodiscard]] std::size_t storage_size() const noexcept {
        return count_ == 0 ? 0 : stride_ * (count_ - 1) + dim_ * dim_;
    }

    std::size_t dim_    = 0;
    std::size_t count_  = 0;
    std::size_t stride_ = 0;
    std::vector<cplx<T>> data_;
};

/// Row-major rows x cols table of real weights (one row per output matrix).
template <class T>
struct CoefficientTable {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<T> values;

    CoefficientTable() = default;
    CoefficientTable(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c) {}

    T &operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    const T &operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

/// Induced 1-norm: largest absolute column sum.
template <class T>
double one_norm(ConstMatrixView<T> m);

template <class T>
double one_norm(const Matrix<T> &m) {
    return one_norm(m.view());
}

struct BackendConfig {
    /// Worker threads for batch-parallel kernels; 0 selects the runtime default.
    int threads = 0;
};

struct BackendCapabilities {
    std::size_t max_batch;
    bool fp32;
    bool fp64;
    int threads;
};

struct KernelCounters {
    std::size_t gemm_calls         = 0;
    std::size_t diagonal_add_calls = 0;
    std::size_t copy_calls         = 0;
    std::size_t expand_calls       = 0;
};

/// Multi-threaded CPU reference backend. Work is split over the batch index;
/// each matrix is processed sequentially with a fixed summation order, so
/// results are bitwise reproducible regardless of the thread count.
class CpuBackend {
  public:
    explicit CpuBackend(BackendConfig config = {});

    [[nodiscard]] BackendCapabilities capabilities() const noexcept;
    [[nodiscard]] int threads() const noexcept { return threads_; }

    /// C[k] = alpha * A[k] * B[k] + beta * C[k]. A and B may alias each other,
    /// C must not overlap either. With beta == 0 the prior content of C is ignored.
    template <Real T>
    void gemm_strided_batched(ConstBatchView<T> a, ConstBatchView<T> b, cplx<T> alpha, cplx<T> beta,
                              BatchView<T> c) const;

    /// C[k] += a * I
    template <Real T>
    void diagonal_add_batched(BatchView<T> c, cplx<T> a) const;

    template <Real T>
    void copy_matrix(ConstBatchView<T> src, std::size_t src_index, BatchView<T> dst, std::size_t dst_index) const;

    /// out[k] = scale * sum_i coeffs(k, i) * basis[i], evaluated as one product of
    /// the (rows x terms) coefficient table with the (terms x d^2) flattened basis.
    template <Real T>
    void expand_linear_combination(std::span<const Matrix<T>> basis, const CoefficientTable<T> &coeffs, T scale,
                                   MatrixBatch<T> &out) const;

    [[nodiscard]] const KernelCounters &counters() const noexcept { return counters_; }
    void reset_counters() const noexcept { counters_ = {}; }

  private:
    int threads_;
    mutable KernelCounters counters_;
};

} // namespace chebprop
