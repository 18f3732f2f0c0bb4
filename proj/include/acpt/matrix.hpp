// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <memory>
#include <type_traits>
#include <vector>

#include "acpt/common.hpp"

namespace acpt {

namespace detail {

// std::vector that default-initializes on resize; lets hot-path temporaries
// skip the zero fill when every element is about to be overwritten.
template <typename T, typename A = std::allocator<T>>
struct default_init_allocator : A {
    template <typename U>
    struct rebind {
        using other = default_init_allocator<U, typename std::allocator_traits<A>::template rebind_alloc<U>>;
    };
    using A::A;
    template <typename U>
    void construct(U* p) noexcept(std::is_nothrow_default_constructible_v<U>) {
        ::new (static_cast<void*>(p)) U;
    }
    template <typename U, typename... Args>
    void construct(U* p, Args&&... args) {
        ::new (static_cast<void*>(p)) U(std::forward<Args>(args)...);
    }
};

} // namespace detail

// Dense row-major matrix. Parameters live in float in production; the same
// templates run in double for gradient checking. Every reduction below
// accumulates in double with a fixed element order, so results are
// bit-reproducible and independent of the thread count.
template <typename T>
struct Mat {
    std::size_t rows = 0, cols = 0;
    std::vector<T, detail::default_init_allocator<T>> a;

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, T{}) {}

    // Uninitialized storage; for temporaries that are fully overwritten.
    static Mat uninit(std::size_t r, std::size_t c) {
        Mat m;
        m.rows = r;
        m.cols = c;
        m.a.resize(r * c);
        return m;
    }

    T* operator[](std::size_t i) { return a.data() + i * cols; }
    const T* operator[](std::size_t i) const { return a.data() + i * cols; }

    T& at(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    T at(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    std::size_t size() const { return a.size(); }
    void fill(T v) { std::fill(a.begin(), a.end(), v); }

    friend bool operator==(const Mat&, const Mat&) = default;
};

// Read-only view of a contiguous row block (used to slice one batch item out
// of a stacked activation matrix without copying).
template <typename T>
struct MatView {
    const T* p = nullptr;
    std::size_t rows = 0, cols = 0;

    MatView() = default;
    MatView(const Mat<T>& m) : p(m.a.data()), rows(m.rows), cols(m.cols) {}
    MatView(const T* data, std::size_t r, std::size_t c) : p(data), rows(r), cols(c) {}

    const T* operator[](std::size_t i) const { return p + i * cols; }
};

template <typename T>
struct MutView {
    T* p = nullptr;
    std::size_t rows = 0, cols = 0;

    MutView() = default;
    MutView(Mat<T>& m) : p(m.a.data()), rows(m.rows), cols(m.cols) {}
    MutView(T* data, std::size_t r, std::size_t c) : p(data), rows(r), cols(c) {}

    T* operator[](std::size_t i) { return p + i * cols; }
    operator MatView<T>() const { return {p, rows, cols}; }
};

template <typename T>
MatView<T> row_block(const Mat<T>& m, std::size_t row0, std::size_t nrows) {
    assert(row0 + nrows <= m.rows);
    return {m.a.data() + row0 * m.cols, nrows, m.cols};
}

template <typename T>
MutView<T> row_block(Mat<T>& m, std::size_t row0, std::size_t nrows) {
    assert(row0 + nrows <= m.rows);
    return {m.a.data() + row0 * m.cols, nrows, m.cols};
}

// C = A * B. Parallel over rows of C; the k-loop runs in fixed order per row.
template <typename T>
void matmul(MatView<T> A, MatView<T> B, MutView<T> C) {
    assert(A.cols == B.rows && C.rows == A.rows && C.cols == B.cols);
    const std::size_t K = A.cols, N = B.cols;
    parallel_for(A.rows, [&](std::size_t r0, std::size_t r1) {
        std::vector<double> acc(N);
        for (std::size_t i = r0; i < r1; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            const T* ai = A[i];
            for (std::size_t k = 0; k < K; ++k) {
                const double av = static_cast<double>(ai[k]);
                const T* bk = B[k];
                for (std::size_t j = 0; j < N; ++j) {
                    acc[j] += av * static_cast<double>(bk[j]);
                }
            }
            T* ci = C[i];
            for (std::size_t j = 0; j < N; ++j) ci[j] = static_cast<T>(acc[j]);
        }
    });
}

// C = A^T * B (A: k x m, B: k x n). Each worker owns a contiguous range of
// output rows and scans A, B once with the k-loop in fixed order, so the
// sum order per output element never depends on scheduling.
template <typename T>
void matmul_tn(MatView<T> A, MatView<T> B, MutView<T> C) {
    assert(A.rows == B.rows && C.rows == A.cols && C.cols == B.cols);
    const std::size_t K = A.rows, M = A.cols, N = B.cols;
    parallel_for(M, [&](std::size_t i0, std::size_t i1) {
        const std::size_t width = i1 - i0;
        std::vector<double> acc(width * N, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            const T* ak = A[k];
            const T* bk = B[k];
            for (std::size_t i = i0; i < i1; ++i) {
                const double av = static_cast<double>(ak[i]);
                double* acci = acc.data() + (i - i0) * N;
                for (std::size_t j = 0; j < N; ++j) {
                    acci[j] += av * static_cast<double>(bk[j]);
                }
            }
        }
        for (std::size_t i = i0; i < i1; ++i) {
            T* ci = C[i];
            const double* acci = acc.data() + (i - i0) * N;
            for (std::size_t j = 0; j < N; ++j) ci[j] = static_cast<T>(acci[j]);
        }
    });
}

template <typename T>
Mat<T> transpose(MatView<T> A) {
    Mat<T> out = Mat<T>::uninit(A.cols, A.rows);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const T* ai = A[i];
        for (std::size_t j = 0; j < A.cols; ++j) out[j][i] = ai[j];
    }
    return out;
}

// exp for the float pipeline: 2^k reconstruction with a degree-5 polynomial
// on the reduced argument. Max relative error ~2e-7; branch-free, so the
// softmax loops vectorize. The double pipeline keeps std::exp.
inline float fast_expf(float x) {
    x = std::min(88.0f, std::max(-87.0f, x));
    const float z = x * 1.44269504088896341f; // x / ln 2
    const float zf = std::floor(z + 0.5f);
    const float r = x - zf * 0.693359375f - zf * -2.12194440e-4f; // Cody-Waite
    float p = 1.9875691500e-4f;
    p = p * r + 1.3981999507e-3f;
    p = p * r + 8.3334519073e-3f;
    p = p * r + 4.1665795894e-2f;
    p = p * r + 1.6666665459e-1f;
    p = p * r + 5.0000001201e-1f;
    p = p * r * r + r + 1.0f;
    const std::int32_t k = static_cast<std::int32_t>(zf);
    const std::uint32_t bits = static_cast<std::uint32_t>(127 + k) << 23;
    float scale;
    std::memcpy(&scale, &bits, sizeof(scale));
    return p * scale;
}

template <typename T>
T exp_unit(T x) {
    if constexpr (std::is_same_v<T, float>) {
        return fast_expf(x);
    } else {
        return std::exp(x);
    }
}

// C += A * B^T is never needed; products against transposed operands go
// through an explicit transpose + matmul so every kernel keeps the same
// vectorizable fixed-order inner loop.

template <typename T>
void add_row_bias(Mat<T>& m, const Mat<T>& bias) {
    assert(bias.rows == 1 && bias.cols == m.cols);
    parallel_for(m.rows, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t i = r0; i < r1; ++i) {
            T* mi = m[i];
            const T* b = bias[0];
            for (std::size_t j = 0; j < m.cols; ++j) mi[j] += b[j];
        }
    });
}

// bias gradient: column sums, sequential rows (fixed order), vectorized cols.
template <typename T>
void colsum_into(MatView<T> m, Mat<T>& out) {
    assert(out.rows == 1 && out.cols == m.cols);
    std::vector<double> acc(m.cols, 0.0);
    for (std::size_t i = 0; i < m.rows; ++i) {
        const T* mi = m[i];
        for (std::size_t j = 0; j < m.cols; ++j) acc[j] += static_cast<double>(mi[j]);
    }
    for (std::size_t j = 0; j < m.cols; ++j) out[0][j] = static_cast<T>(acc[j]);
}

template <typename T>
void add_inplace(Mat<T>& dst, const Mat<T>& src) {
    assert(dst.rows == src.rows && dst.cols == src.cols);
    parallel_for(dst.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) dst.a[i] += src.a[i];
    });
}

template <typename T>
void relu_inplace(Mat<T>& m) {
    parallel_for(m.size(), [&](std::size_t i0, std::size_t i1) {
        for (std::size_t i = i0; i < i1; ++i) {
            if (m.a[i] < T(0)) m.a[i] = T(0);
        }
    });
}

template <typename T>
bool all_finite(const Mat<T>& m) {
    for (T v : m.a) {
        if (!std::isfinite(static_cast<double>(v))) return false;
    }
    return true;
}

} // namespace acpt
