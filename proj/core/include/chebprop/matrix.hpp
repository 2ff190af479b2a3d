/**
 * @file
 * Scalar/precision vocabulary and a small owning dense complex matrix.
 *
 * All matrices in the library are square, row-major, and store interleaved
 * complex scalars (re, im), i.e. element (r, c) lives at `data[r * dim + c]`.
 */

#pragma once

#include <chebprop/error.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <type_traits>
#include <vector>

namespace chebprop {

template <class T>
using cplx = std::complex<T>;

template <class T>
concept Real = std::is_same_v<T, float> || std::is_same_v<T, double>;

enum class Precision { fp32, fp64 };

/// Accepts "fp32"/"single"/"float" and "fp64"/"double"; anything else is a config error.
Precision parse_precision(std::string_view token);
std::string_view to_string(Precision p) noexcept;

template <Real T>
inline constexpr Precision precision_of = std::is_same_v<T, float> ? Precision::fp32 : Precision::fp64;

/// Truncation target of the Chebyshev series: 2^-24 (FP32) or 2^-53 (FP64).
constexpr double target_epsilon(Precision p) noexcept {
    return p == Precision::fp32 ? 0x1p-24 : 0x1p-53;
}

/// Non-owning read-only view of one d x d matrix.
template <class T>
struct ConstMatrixView {
    const cplx<T> *data = nullptr;
    std::size_t dim     = 0;

    const cplx<T> &operator()(std::size_t r, std::size_t c) const { return data[r * dim + c]; }
};

template <class T>
class Matrix {
  public:
    using value_type = cplx<T>;

    Matrix() = default;
    explicit Matrix(std::size_t dim) : dim_(dim), data_(dim * dim) {}

    Matrix(std::initializer_list<std::initializer_list<cplx<T>>> rows) : dim_(rows.size()) {
        data_.reserve(dim_ * dim_);
        for (const auto &row : rows) {
            if (row.size() != dim_)
                throw Error(ErrorCode::shape, "matrix literal must be square");
            data_.insert(data_.end(), row.begin(), row.end());
        }
    }

    static Matrix identity(std::size_t dim) {
        Matrix m(dim);
        for (std::size_t i = 0; i < dim; ++i)
            m(i, i) = 1;
        return m;
    }

    [[nodiscard]] std::size_t dim() const noexcept { return dim_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    cplx<T> &operator()(std::size_t r, std::size_t c) { return data_[r * dim_ + c]; }
    const cplx<T> &operator()(std::size_t r, std::size_t c) const { return data_[r * dim_ + c]; }

    [[nodiscard]] std::span<cplx<T>> elements() noexcept { return data_; }
    [[nodiscard]] std::span<const cplx<T>> elements() const noexcept { return data_; }
    [[nodiscard]] cplx<T> *data() noexcept { return data_.data(); }
    [[nodiscard]] const cplx<T> *data() const noexcept { return data_.data(); }

    [[nodiscard]] ConstMatrixView<T> view() const noexcept { return {data_.data(), dim_}; }

    template <class U>
    [[nodiscard]] Matrix<U> cast() const {
        Matrix<U> out(dim_);
        std::ranges::transform(data_, out.elements().begin(),
                               [](const cplx<T> &z) { return cplx<U>(static_cast<U>(z.real()), static_cast<U>(z.imag())); });
        return out;
    }

    friend bool operator==(const Matrix &, const Matrix &) = default;

  private:
    std::size_t dim_ = 0;
    std::vector<cplx<T>> data_;
};

// Plain reference arithmetic for single matrices. Batched work goes through
// CpuBackend; these are for setup code (commutators, state application).

template <class T>
Matrix<T> operator*(const Matrix<T> &a, const Matrix<T> &b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::shape, "matrix product dimension mismatch");
    const std::size_t d = a.dim();
    Matrix<T> c(d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            cplx<T> acc{};
            for (std::size_t l = 0; l < d; ++l)
                acc += a(i, l) * b(l, j);
            c(i, j) = acc;
        }
    return c;
}

template <class T>
Matrix<T> operator+(Matrix<T> a, const Matrix<T> &b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::shape, "matrix sum dimension mismatch");
    std::ranges::transform(a.elements(), b.elements(), a.elements().begin(), std::plus<>{});
    return a;
}

template <class T>
Matrix<T> operator-(Matrix<T> a, const Matrix<T> &b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::shape, "matrix difference dimension mismatch");
    std::ranges::transform(a.elements(), b.elements(), a.elements().begin(), std::minus<>{});
    return a;
}

template <class T>
Matrix<T> operator*(cplx<T> s, Matrix<T> a) {
    for (auto &z : a.elements())
        z *= s;
    return a;
}

template <class T>
Matrix<T> adjoint(const Matrix<T> &a) {
    Matrix<T> out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = 0; j < a.dim(); ++j)
            out(j, i) = std::conj(a(i, j));
    return out;
}

template <class T>
cplx<T> trace(const Matrix<T> &a) {
    cplx<T> t{};
    for (std::size_t i = 0; i < a.dim(); ++i)
        t += a(i, i);
    return t;
}

/// Largest elementwise modulus of a - b.
template <class T>
double max_abs_diff(const Matrix<T> &a, const Matrix<T> &b) {
    if (a.dim() != b.dim())
        throw Error(ErrorCode::shape, "comparison dimension mismatch");
    double m = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, static_cast<double>(std::abs(a.elements()[i] - b.elements()[i])));
    return m;
}

/// max_{i,j} |A_ij - conj(A_ji)|
template <class T>
double hermitian_defect(const Matrix<T> &a) {
    double m = 0;
    for (std::size_t i = 0; i < a.dim(); ++i)
        for (std::size_t j = i; j < a.dim(); ++j)
            m = std::max(m, static_cast<double>(std::abs(a(i, j) - std::conj(a(j, i)))));
    return m;
}

} // namespace chebprop
