#pragma once

#include <cstdint>
#include <vector>

namespace brassica::detail {

// Row-major matrix kernels backing the im2col convolution path and the dense
// layers. Every output element is accumulated by exactly one thread in a
// fixed k order, so results are bitwise reproducible for any thread count.

// C (M x N) = A (M x K) * B (K x N). Overwrites C unless accumulate is set.
template <typename T>
void gemm_nn(int64_t M, int64_t N, int64_t K, const T* A, const T* B, T* C,
             bool accumulate = false) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < M; ++i) {
        T* c_row = C + i * N;
        if (!accumulate) {
            for (int64_t j = 0; j < N; ++j) c_row[j] = T(0);
        }
        const T* a_row = A + i * K;
        int64_t k = 0;
        for (; k + 4 <= K; k += 4) {
            const T a0 = a_row[k], a1 = a_row[k + 1], a2 = a_row[k + 2], a3 = a_row[k + 3];
            const T* b0 = B + k * N;
            const T* b1 = b0 + N;
            const T* b2 = b1 + N;
            const T* b3 = b2 + N;
            for (int64_t j = 0; j < N; ++j) {
                c_row[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
            }
        }
        for (; k < K; ++k) {
            const T a = a_row[k];
            const T* b_row = B + k * N;
            for (int64_t j = 0; j < N; ++j) c_row[j] += a * b_row[j];
        }
    }
}

// C (M x N) = A (M x K) * B^T where B is (N x K). Dot-product form with split
// accumulators; the combine tree is fixed, keeping results order-stable.
template <typename T>
void gemm_nt(int64_t M, int64_t N, int64_t K, const T* A, const T* B, T* C,
             bool accumulate = false) {
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < M; ++i) {
        const T* a_row = A + i * K;
        T* c_row = C + i * N;
        for (int64_t j = 0; j < N; ++j) {
            const T* b_row = B + j * K;
            T acc0 = 0, acc1 = 0, acc2 = 0, acc3 = 0;
            int64_t k = 0;
            for (; k + 4 <= K; k += 4) {
                acc0 += a_row[k] * b_row[k];
                acc1 += a_row[k + 1] * b_row[k + 1];
                acc2 += a_row[k + 2] * b_row[k + 2];
                acc3 += a_row[k + 3] * b_row[k + 3];
            }
            T acc = (acc0 + acc1) + (acc2 + acc3);
            for (; k < K; ++k) acc += a_row[k] * b_row[k];
            c_row[j] = accumulate ? c_row[j] + acc : acc;
        }
    }
}

// B (N x M) = A^T for row-major A (M x N).
template <typename T>
void transpose(int64_t M, int64_t N, const T* A, T* B) {
    for (int64_t i = 0; i < M; ++i) {
        for (int64_t j = 0; j < N; ++j) B[j * M + i] = A[i * N + j];
    }
}

// Grow-only scratch buffer reused across calls to avoid per-batch mmap churn.
template <typename T>
std::vector<T>& scratch(size_t which, size_t n) {
    thread_local std::vector<T> bufs[4];
    auto& b = bufs[which];
    if (b.size() < n) b.resize(n);
    return b;
}

}  // namespace brassica::detail
