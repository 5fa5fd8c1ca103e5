// Compiled with -mavx2 and without -mfma: the row kernels must round exactly
// like the scalar reference.

#include "shiftcast/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace shiftcast::simd::detail {
namespace {

inline double horizontal_sum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d pair = _mm_add_pd(lo, hi);
    const __m128d swapped = _mm_unpackhi_pd(pair, pair);
    return _mm_cvtsd_f64(_mm_add_sd(pair, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d prod = _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, prod);
    }
    double sum = horizontal_sum(acc);
    for (; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    double sum = horizontal_sum(acc);
    for (; i < n; ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

void gram_row_linear_avx2(ColumnBlock block, const double* x, double* out) {
    const std::size_t n = block.rows;
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t c = 0; c < block.cols; ++c) {
            const __m256d col = _mm256_loadu_pd(block.column(c) + r);
            acc = _mm256_add_pd(acc, _mm256_mul_pd(col, _mm256_set1_pd(x[c])));
        }
        _mm256_storeu_pd(out + r, acc);
    }
    for (; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < block.cols; ++c) {
            const double prod = block.column(c)[r] * x[c];
            acc = acc + prod;
        }
        out[r] = acc;
    }
}

void gram_row_sqdist_avx2(ColumnBlock block, const double* x, double* out) {
    const std::size_t n = block.rows;
    std::size_t r = 0;
    for (; r + 4 <= n; r += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t c = 0; c < block.cols; ++c) {
            const __m256d diff =
                _mm256_sub_pd(_mm256_loadu_pd(block.column(c) + r), _mm256_set1_pd(x[c]));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
        }
        _mm256_storeu_pd(out + r, acc);
    }
    for (; r < n; ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < block.cols; ++c) {
            const double diff = block.column(c)[r] - x[c];
            const double sq = diff * diff;
            acc = acc + sq;
        }
        out[r] = acc;
    }
}

void add_scaled_pair_avx2(double* g, double a, const double* ra, double b, const double* rb,
                          std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    const __m256d vb = _mm256_set1_pd(b);
    std::size_t k = 0;
    for (; k + 4 <= n; k += 4) {
        const __m256d ta = _mm256_mul_pd(va, _mm256_loadu_pd(ra + k));
        const __m256d tb = _mm256_mul_pd(vb, _mm256_loadu_pd(rb + k));
        _mm256_storeu_pd(g + k, _mm256_add_pd(_mm256_loadu_pd(g + k), _mm256_add_pd(ta, tb)));
    }
    for (; k < n; ++k) {
        const double ta = a * ra[k];
        const double tb = b * rb[k];
        g[k] = g[k] + (ta + tb);
    }
}

}  // namespace

const KernelTable& avx2_table() noexcept {
    static constexpr KernelTable kTable{
        .dot = dot_avx2,
        .squared_distance = squared_distance_avx2,
        .weighted_sum = dot_avx2,
        .gram_row_linear = gram_row_linear_avx2,
        .gram_row_sqdist = gram_row_sqdist_avx2,
        .add_scaled_pair = add_scaled_pair_avx2,
    };
    return kTable;
}

}  // namespace shiftcast::simd::detail

#endif
