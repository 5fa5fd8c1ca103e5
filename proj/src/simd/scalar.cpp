#include "shiftcast/simd/kernels.hpp"

namespace shiftcast::simd::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += a[i] * b[i];
    }
    return sum;
}

double squared_distance_scalar(const double* a, const double* b, std::size_t n) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double diff = a[i] - b[i];
        sum += diff * diff;
    }
    return sum;
}

void gram_row_linear_scalar(ColumnBlock block, const double* x, double* out) {
    for (std::size_t r = 0; r < block.rows; ++r) {
        out[r] = 0.0;
    }
    for (std::size_t c = 0; c < block.cols; ++c) {
        const double* col = block.column(c);
        const double xc = x[c];
        for (std::size_t r = 0; r < block.rows; ++r) {
            const double prod = col[r] * xc;
            out[r] = out[r] + prod;
        }
    }
}

void gram_row_sqdist_scalar(ColumnBlock block, const double* x, double* out) {
    for (std::size_t r = 0; r < block.rows; ++r) {
        out[r] = 0.0;
    }
    for (std::size_t c = 0; c < block.cols; ++c) {
        const double* col = block.column(c);
        const double xc = x[c];
        for (std::size_t r = 0; r < block.rows; ++r) {
            const double diff = col[r] - xc;
            const double sq = diff * diff;
            out[r] = out[r] + sq;
        }
    }
}

void add_scaled_pair_scalar(double* g, double a, const double* ra, double b, const double* rb,
                            std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) {
        const double ta = a * ra[k];
        const double tb = b * rb[k];
        g[k] = g[k] + (ta + tb);
    }
}

}  // namespace

const KernelTable& scalar_table() noexcept {
    static constexpr KernelTable kTable{
        .dot = dot_scalar,
        .squared_distance = squared_distance_scalar,
        .weighted_sum = dot_scalar,
        .gram_row_linear = gram_row_linear_scalar,
        .gram_row_sqdist = gram_row_sqdist_scalar,
        .add_scaled_pair = add_scaled_pair_scalar,
    };
    return kTable;
}

}  // namespace shiftcast::simd::detail
